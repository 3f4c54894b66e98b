//! Semiautomata, their transformation semigroups, and transformer networks
//! with hand-set weights that simulate them.
//!
//! The crate is split into five layers:
//!
//! - [`automaton`]: semiautomata, the sequential oracle and a catalog of builtins.
//! - [`algebra`]: transformation semigroups, groups, composition series, cascades.
//! - [`tkernel`]: causal attention, ReLU MLPs, positional rows and weight gadgets.
//! - [`compiler`]: constructions producing [`tkernel::TransformerNet`]s.
//! - [`harness`]: differential and exhaustive verification, benchmarks and the CLI.

pub mod algebra;
pub mod automaton;
pub mod compiler;
pub mod error;
pub mod harness;
pub mod tkernel;

pub use automaton::{Semiautomaton, StateSequence};
pub use error::{Error, Result};
