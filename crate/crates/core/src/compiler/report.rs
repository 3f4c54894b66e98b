use crate::tkernel::Metrics;
use serde::{Deserialize, Serialize};

/// Relative slack allowed when comparing floating-point measurements to bounds.
pub const BOUND_RTOL: f64 = 1e-9;

/// Largest absolute weight or embedding entry.
pub fn norm(m: &Metrics) -> f64 {
    m.max_abs_weight.max(m.max_abs_embedding)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `true` when the check is an equality rather than an upper bound.
    pub exact: bool,
    pub pass: bool,
}

/// Measured sizes of a compiled net next to the bounds of its construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub construction: String,
    pub t_max: usize,
    pub metrics: Metrics,
    pub checks: Vec<BoundCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CompileReport {
    pub fn new(construction: impl Into<String>, t_max: usize, metrics: Metrics) -> Self {
        CompileReport { construction: construction.into(), t_max, metrics, checks: vec![], notes: vec![] }
    }

    pub fn at_most(&mut self, name: &str, measured: f64, bound: f64) -> &mut Self {
        let pass = measured <= bound + BOUND_RTOL * bound.abs().max(1.0);
        self.checks.push(BoundCheck { name: name.into(), measured, bound, exact: false, pass });
        self
    }

    pub fn equals(&mut self, name: &str, measured: f64, expected: f64) -> &mut Self {
        let pass = (measured - expected).abs() <= BOUND_RTOL * expected.abs().max(1.0);
        self.checks.push(BoundCheck { name: name.into(), measured, bound: expected, exact: true, pass });
        self
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.metrics)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
