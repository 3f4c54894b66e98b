//! Transformation semigroups, finite groups and cascade products.

pub mod cascade;
pub mod catalog;
pub mod group;
pub mod semigroup;
pub mod transform;

pub use cascade::{cascade_evaluate, CascadeSpec, CascadeTrace};
pub use group::{
    canonical_from_table, canonical_group_semiautomaton, composition_series, find_isomorphism,
    is_solvable_group, subgroup_table, validate_action, CompositionSeries, GroupTable,
};
pub use semigroup::{
    is_permutation_reset, maximal_subgroups, semigroup_closure, semigroup_closure_with_cap,
    transition_semigroup, FiniteSemigroup,
};
pub use transform::{compose, Transformation};

use crate::automaton::Semiautomaton;
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Summary of the algebraic structure of `T(A)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Analysis {
    pub semigroup_size: usize,
    pub is_group: bool,
    pub maximal_subgroup_orders: Vec<usize>,
    pub solvable: bool,
    pub aperiodic: bool,
    pub permutation_reset: bool,
}

/// True iff every maximal subgroup of `T(A)` is solvable.
pub fn is_solvable_semiautomaton(a: &Semiautomaton) -> Result<bool> {
    Ok(analyze(a)?.solvable)
}

pub fn analyze(a: &Semiautomaton) -> Result<Analysis> {
    let s = transition_semigroup(a)?;
    let groups = maximal_subgroups(&s);
    let mut solvable = true;
    let mut orders = Vec::new();
    for g in &groups {
        orders.push(g.len());
        if g.len() > 1 && !subgroup_table(&s, g)?.0.is_solvable() {
            solvable = false;
        }
    }
    orders.sort_unstable();
    Ok(Analysis {
        semigroup_size: s.len(),
        is_group: s.is_group(),
        aperiodic: orders.iter().all(|&o| o == 1),
        maximal_subgroup_orders: orders,
        solvable,
        permutation_reset: is_permutation_reset(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solvability_verdicts() {
        assert!(is_solvable_semiautomaton(&Semiautomaton::gridworld(8).unwrap()).unwrap());
        assert!(is_solvable_semiautomaton(&Semiautomaton::memory(3).unwrap()).unwrap());
        assert!(!is_solvable_semiautomaton(&catalog::canonical("S5").unwrap()).unwrap());
        let g2 = analyze(&Semiautomaton::gridworld(2).unwrap()).unwrap();
        assert!(g2.aperiodic);
    }
}
