use super::rng::SplitMix64;
use crate::automaton::Semiautomaton;
use crate::compiler::{BoundCheck, CompileReport};
use crate::error::{input, Error, Result};
use crate::tkernel::{NetPlan, TransformerNet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Largest number of sequences an exhaustive run will enumerate by default.
pub const EXHAUSTIVE_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub input: Vec<String>,
    pub expected: Vec<usize>,
    /// Decoded states, absent when decoding failed.
    pub got: Option<Vec<usize>>,
    pub position: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub automaton: String,
    pub construction: String,
    pub q0: usize,
    pub t: usize,
    pub trials: u64,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub mismatches: u64,
    pub first_mismatch: Option<Mismatch>,
    /// Largest distance of a decoded coordinate from its integer.
    pub max_rounding_error: f64,
    pub checks: Vec<BoundCheck>,
    #[serde(skip)]
    pub oracle_seconds: f64,
    #[serde(skip)]
    pub net_seconds: f64,
}

impl VerificationReport {
    pub fn metrics_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.metrics_pass()
    }

    /// Attaches the bound checks of the compile step.
    pub fn with_report(mut self, r: &CompileReport) -> Self {
        self.checks = r.checks.clone();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Outcome {
    mismatch: Option<Mismatch>,
    rounding: f64,
}

fn check_one(a: &Semiautomaton, q0: usize, plan: &NetPlan, x: &[usize]) -> Result<Outcome> {
    let expected = a.run(q0, x)?.states;
    let labels = || x.iter().map(|&s| a.alphabet()[s].clone()).collect();
    match plan.evaluate_with_margin(x) {
        Ok(d) => {
            let rounding = 0.5 - d.min_margin;
            let mismatch = d.states.iter().zip(&expected).position(|(g, e)| g != e).map(|position| Mismatch {
                input: labels(),
                expected: expected.clone(),
                got: Some(d.states.clone()),
                position,
                error: None,
            });
            Ok(Outcome { mismatch, rounding })
        }
        Err(Error::Decode { msg, position, .. }) => Ok(Outcome {
            mismatch: Some(Mismatch { input: labels(), expected, got: None, position, error: Some(msg) }),
            rounding: 0.5,
        }),
        Err(e) => Err(e),
    }
}

fn check_net(a: &Semiautomaton, net: &TransformerNet, t: usize) -> Result<()> {
    if t > net.t_max {
        return input(format!("T = {t} exceeds the net's compiled length {}", net.t_max));
    }
    if net.alphabet.len() != a.num_symbols() {
        return input(format!("net reads {} symbols, automaton has {}", net.alphabet.len(), a.num_symbols()));
    }
    Ok(())
}

fn run(
    a: &Semiautomaton,
    q0: usize,
    net: &TransformerNet,
    t: usize,
    seqs: &[Vec<usize>],
    exhaustive: bool,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    let plan = net.plan();
    let start = Instant::now();
    for x in seqs {
        a.run(q0, x)?;
    }
    let oracle_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let outcomes: Vec<Outcome> = seqs.par_iter().map(|x| check_one(a, q0, &plan, x)).collect::<Result<_>>()?;
    let net_seconds = start.elapsed().as_secs_f64();
    let mismatches = outcomes.iter().filter(|o| o.mismatch.is_some()).count() as u64;
    let max_rounding_error = outcomes.iter().map(|o| o.rounding).fold(0.0, f64::max);
    let first_mismatch = outcomes.into_iter().find_map(|o| o.mismatch);
    Ok(VerificationReport {
        automaton: a.name().unwrap_or("automaton").to_string(),
        construction: net.construction.clone(),
        q0,
        t,
        trials: seqs.len() as u64,
        exhaustive,
        seed,
        mismatches,
        first_mismatch,
        max_rounding_error,
        checks: vec![],
        oracle_seconds,
        net_seconds,
    })
}

/// Compares the net with the oracle on `trials` uniform length-`t`
/// sequences drawn from a [`SplitMix64`] stream seeded with `seed`.
pub fn differential_test(
    a: &Semiautomaton,
    q0: usize,
    net: &TransformerNet,
    t: usize,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport> {
    check_net(a, net, t)?;
    let mut rng = SplitMix64::new(seed);
    let seqs: Vec<Vec<usize>> = (0..trials).map(|_| rng.sequence(t, a.num_symbols())).collect();
    run(a, q0, net, t, &seqs, false, Some(seed))
}

/// Every length-`t` sequence, refusing when there are more than [`EXHAUSTIVE_CAP`].
pub fn exhaustive_test(a: &Semiautomaton, q0: usize, net: &TransformerNet, t: usize) -> Result<VerificationReport> {
    exhaustive_test_with_cap(a, q0, net, t, EXHAUSTIVE_CAP)
}

pub fn exhaustive_test_with_cap(a: &Semiautomaton, q0: usize, net: &TransformerNet, t: usize, cap: u64) -> Result<VerificationReport> {
    check_net(a, net, t)?;
    let k = a.num_symbols() as u64;
    let total = (0..t).try_fold(1u64, |acc, _| acc.checked_mul(k).filter(|&v| v <= cap));
    let Some(total) = total else {
        return Err(Error::Refusal(format!(
            "{k}^{t} sequences exceed the exhaustive cap of {cap}; run a differential test (e.g. --trials 10000) instead"
        )));
    };
    if t == 0 {
        return run(a, q0, net, 0, &[], true, None);
    }
    let seqs: Vec<Vec<usize>> = (0..total)
        .map(|code| {
            let mut c = code;
            (0..t)
                .map(|_| {
                    let s = (c % k) as usize;
                    c /= k;
                    s
                })
                .collect()
        })
        .collect();
    run(a, q0, net, t, &seqs, true, None)
}
