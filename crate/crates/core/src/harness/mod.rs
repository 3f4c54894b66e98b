//! Verification against the sequential oracle, benchmarks and the CLI.

pub mod bench;
pub mod cli;
pub mod rng;
pub mod verify;

pub use bench::{bench, BenchResult, BenchRow};
pub use rng::SplitMix64;
pub use verify::{differential_test, exhaustive_test, exhaustive_test_with_cap, Mismatch, VerificationReport, EXHAUSTIVE_CAP};
