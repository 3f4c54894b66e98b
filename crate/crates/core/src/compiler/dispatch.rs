//! Picks a construction by name and checks it applies to the automaton.

use super::{
    compile_group_automaton, compile_gridworld, compile_log_depth, compile_memory, compile_mod_counter,
    compile_permutation_reset, counter_report, group_automaton_net, CompileReport,
};
use crate::algebra::{analyze, transition_semigroup, GroupTable};
use crate::automaton::Semiautomaton;
use crate::error::{input, Error, Result};
use crate::tkernel::TransformerNet;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    LogDepth,
    KrohnRhodes,
    Gridworld,
    Counter,
    Memory,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::LogDepth,
        Construction::KrohnRhodes,
        Construction::Gridworld,
        Construction::Counter,
        Construction::Memory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::LogDepth => "log-depth",
            Construction::KrohnRhodes => "krohn-rhodes",
            Construction::Gridworld => "gridworld",
            Construction::Counter => "counter",
            Construction::Memory => "memory",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Construction::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown construction {s:?}")))
    }
}

/// Compiles `a` from `q0` with the named construction.
///
/// `krohn-rhodes` covers group automata with a solvable transition group and
/// permutation-reset automata whose permutations generate a solvable group.
/// A transition semigroup holding a non-solvable group is refused.
pub fn compile(a: &Semiautomaton, q0: usize, construction: Construction, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    if q0 >= a.num_states() {
        return input(format!("q0={q0} out of range for {} states", a.num_states()));
    }
    let (mut net, report) = match construction {
        Construction::LogDepth => compile_log_depth(a, q0, t_max)?,
        Construction::KrohnRhodes => krohn_rhodes(a, q0, t_max)?,
        Construction::Gridworld => {
            let s = a.num_states().saturating_sub(1);
            if s == 0 || a.delta() != Semiautomaton::gridworld(s)?.delta() {
                return Err(Error::Unsupported("the gridworld construction needs gridworld(S) with symbols L, ⊥, R".into()));
            }
            if q0 != 0 {
                return Err(Error::Unsupported("the gridworld construction starts at state 0".into()));
            }
            compile_gridworld(s, t_max)?
        }
        Construction::Counter => {
            let s = transition_semigroup(a)?;
            let table = if s.is_group() { Some(GroupTable::from_semigroup(&s)?.0) } else { None };
            match table {
                Some(g) if g.n >= 2 && g.cyclic_generator().is_some() => {
                    let sim = compile_mod_counter(g.n, t_max)?;
                    let report = counter_report(&sim)?;
                    (group_automaton_net(&sim, a, q0, "counter")?, report)
                }
                _ => return Err(Error::Unsupported("the counter construction needs a nontrivial cyclic transition group".into())),
            }
        }
        Construction::Memory => {
            let n = a.num_states();
            if a.delta() != Semiautomaton::memory(n)?.delta() {
                return Err(Error::Unsupported("the memory construction needs memory(n) with symbols ⊥, 0, …, n−1".into()));
            }
            compile_memory(n, t_max, q0)?
        }
    };
    net.alphabet = a.alphabet().to_vec();
    Ok((net, report))
}

fn krohn_rhodes(a: &Semiautomaton, q0: usize, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    let info = analyze(a)?;
    if !info.solvable {
        let worst = info.maximal_subgroup_orders.iter().max().copied().unwrap_or(1);
        return Err(Error::Refusal(format!(
            "the transition semigroup contains a non-solvable group (maximal subgroup orders {:?}, largest {worst}); no solvable cascade exists, use the log-depth construction",
            info.maximal_subgroup_orders
        )));
    }
    if info.is_group {
        compile_group_automaton(a, q0, t_max)
    } else if info.permutation_reset {
        compile_permutation_reset(a, q0, t_max)
    } else {
        Err(Error::Unsupported(
            "solvable but neither a group nor a permutation-reset automaton; compile a cascade of permutation-reset components instead".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalog;

    #[test]
    fn names_round_trip() {
        for c in Construction::ALL {
            assert_eq!(c.name().parse::<Construction>().unwrap(), c);
        }
        assert!("fast".parse::<Construction>().is_err());
    }

    #[test]
    fn a5_is_refused() {
        let a = catalog::canonical("A5").unwrap();
        let err = compile(&a, 0, Construction::KrohnRhodes, 4).unwrap_err();
        assert!(matches!(err, Error::Refusal(ref m) if m.contains("non-solvable")), "{err}");
    }

    #[test]
    fn routes() {
        let p = Semiautomaton::parity();
        let (net, _) = compile(&p, 0, Construction::Counter, 6).unwrap();
        assert_eq!(net.evaluate(&[1, 1, 0, 1]).unwrap(), vec![1, 0, 0, 1]);
        let m = Semiautomaton::memory(2).unwrap();
        assert!(compile(&m, 0, Construction::KrohnRhodes, 4).is_ok());
        assert!(compile(&m, 0, Construction::Counter, 4).is_err());
        let g = Semiautomaton::gridworld(2).unwrap();
        assert!(matches!(compile(&g, 0, Construction::KrohnRhodes, 4), Err(Error::Unsupported(_))));
        assert!(compile(&g, 0, Construction::Gridworld, 4).is_ok());
        assert!(compile(&g, 1, Construction::Gridworld, 4).is_err());
    }
}
