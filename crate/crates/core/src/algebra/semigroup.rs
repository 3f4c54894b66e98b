use super::transform::{compose_unchecked, Transformation};
use crate::automaton::Semiautomaton;
use crate::error::{input, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};

pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

/// A finite semigroup of transformations with its full Cayley table.
///
/// `cayley[i][j]` is the index of `elements[i] ∘ elements[j]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteSemigroup {
    pub elements: Vec<Transformation>,
    pub cayley: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
    pub contains_identity: bool,
    pub all_invertible: bool,
}

impl FiniteSemigroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, t: &Transformation) -> Option<usize> {
        self.elements.iter().position(|e| e == t)
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.cayley[i][j]
    }

    pub fn is_group(&self) -> bool {
        self.contains_identity && self.all_invertible
    }

    pub fn identity(&self) -> Option<usize> {
        self.elements.iter().position(|e| e.is_identity())
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cayley[i][i] == i).collect()
    }
}

pub fn semigroup_closure(generators: &[Transformation]) -> Result<FiniteSemigroup> {
    semigroup_closure_with_cap(generators, DEFAULT_ELEMENT_CAP)
}

/// Breadth-first closure under composition. Errors once more than `cap`
/// elements have been discovered.
pub fn semigroup_closure_with_cap(generators: &[Transformation], cap: usize) -> Result<FiniteSemigroup> {
    let Some(first) = generators.first() else {
        return input("closure needs at least one generator");
    };
    let n = first.len();
    if generators.iter().any(|g| g.len() != n) {
        return input("generators act on different ground sets");
    }
    let mut index: HashMap<Transformation, usize> = HashMap::new();
    let mut elements: Vec<Transformation> = Vec::new();
    let mut gen_idx = Vec::new();
    let mut queue = VecDeque::new();
    for g in generators {
        let i = *index.entry(g.clone()).or_insert_with(|| {
            elements.push(g.clone());
            queue.push_back(elements.len() - 1);
            elements.len() - 1
        });
        if !gen_idx.contains(&i) {
            gen_idx.push(i);
        }
    }
    let gens: Vec<Transformation> = gen_idx.iter().map(|&i| elements[i].clone()).collect();
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = compose_unchecked(g, &elements[x]);
            if !index.contains_key(&y) {
                if elements.len() >= cap {
                    return Err(Error::Resource(format!("semigroup closure exceeded {cap} elements")));
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    let cayley: Vec<Vec<usize>> = elements
        .iter()
        .map(|a| elements.iter().map(|b| index[&compose_unchecked(a, b)]).collect())
        .collect();
    let contains_identity = elements.iter().any(|e| e.is_identity());
    let all_invertible = elements.iter().all(|e| e.is_permutation());
    Ok(FiniteSemigroup { elements, cayley, generators: gen_idx, contains_identity, all_invertible })
}

/// The transformation semigroup generated by the per-symbol maps of `a`.
pub fn transition_semigroup(a: &Semiautomaton) -> Result<FiniteSemigroup> {
    semigroup_closure(&a.transition_maps())
}

/// For each idempotent `e`, the group of units of `eSe`, as sorted index sets.
pub fn maximal_subgroups(s: &FiniteSemigroup) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for e in s.idempotents() {
        let local: BTreeSet<usize> = (0..s.len()).map(|x| s.mul(s.mul(e, x), e)).collect();
        let units: Vec<usize> = local
            .iter()
            .copied()
            .filter(|&x| local.iter().any(|&y| s.mul(x, y) == e && s.mul(y, x) == e))
            .collect();
        out.push(units);
    }
    out
}

/// Every symbol acts as a bijection or as a constant map.
pub fn is_permutation_reset(a: &Semiautomaton) -> bool {
    a.transition_maps()
        .iter()
        .all(|t| t.is_permutation() || t.constant_value().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[usize]) -> Transformation {
        Transformation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn flip_flop_closure() {
        let s = semigroup_closure(&[t(&[0, 1]), t(&[0, 0]), t(&[1, 1])]).unwrap();
        assert_eq!(s.len(), 3);
        let mut groups = maximal_subgroups(&s);
        groups.sort();
        assert_eq!(groups.len(), 3);
        assert!(groups.iter().all(|g| g.len() == 1));
    }

    #[test]
    fn c3_is_group() {
        let s = semigroup_closure(&[t(&[1, 2, 0])]).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.all_invertible && s.contains_identity);
        let g = maximal_subgroups(&s);
        assert_eq!(g, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn cap_is_enforced() {
        let r = semigroup_closure_with_cap(&[t(&[1, 0, 2, 3, 4]), t(&[1, 2, 3, 4, 0])], 50);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn cayley_consistent() {
        let s = semigroup_closure(&[t(&[1, 0, 2]), t(&[0, 0, 1])]).unwrap();
        for i in 0..s.len() {
            for j in 0..s.len() {
                assert_eq!(s.elements[s.cayley[i][j]], compose_unchecked(&s.elements[i], &s.elements[j]));
            }
        }
    }
}
