//! Small permutation groups used throughout tests and the CLI.

use super::group::{canonical_group_semiautomaton, GroupTable};
use super::semigroup::{semigroup_closure, FiniteSemigroup};
use super::transform::Transformation;
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};

fn perm(v: Vec<usize>) -> Transformation {
    Transformation::new(v).expect("valid permutation")
}

fn closure(gens: Vec<Vec<usize>>) -> FiniteSemigroup {
    semigroup_closure(&gens.into_iter().map(perm).collect::<Vec<_>>()).expect("small closure")
}

pub fn cyclic(n: usize) -> FiniteSemigroup {
    closure(vec![(0..n).map(|i| (i + 1) % n).collect()])
}

pub fn symmetric(n: usize) -> FiniteSemigroup {
    if n < 2 {
        return closure(vec![(0..n.max(1)).collect()]);
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    closure(vec![swap, (0..n).map(|i| (i + 1) % n).collect()])
}

pub fn alternating(n: usize) -> FiniteSemigroup {
    if n < 3 {
        return closure(vec![(0..n.max(1)).collect()]);
    }
    let mut c3: Vec<usize> = (0..n).collect();
    c3[0] = 1;
    c3[1] = 2;
    c3[2] = 0;
    let mut gens = vec![c3];
    if n > 3 {
        let long: Vec<usize> = if n % 2 == 1 {
            (0..n).map(|i| (i + 1) % n).collect()
        } else {
            let mut v: Vec<usize> = (0..n).collect();
            for i in 1..n {
                v[i] = if i + 1 < n { i + 1 } else { 1 };
            }
            v
        };
        gens.push(long);
    }
    closure(gens)
}

/// Dihedral group of order `2n` acting on an `n`-gon.
pub fn dihedral(n: usize) -> FiniteSemigroup {
    closure(vec![(0..n).map(|i| (i + 1) % n).collect(), (0..n).map(|i| (n - i) % n).collect()])
}

/// Unit quaternions `±1, ±i, ±j, ±k`: element `u + 4s` is `(-1)^s · [1, i, j, k][u]`.
pub fn quaternion_table() -> GroupTable {
    // (sign, unit) of unit products
    const UNIT: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let mul = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (s, u) = UNIT[a % 4][b % 4];
                    u + 4 * ((s + a / 4 + b / 4) % 2)
                })
                .collect()
        })
        .collect();
    GroupTable::from_mul(mul).expect("quaternion table is a group")
}

pub fn quaternion() -> FiniteSemigroup {
    let t = quaternion_table();
    let reg = t.left_regular();
    closure(vec![reg[1].clone(), reg[2].clone()])
}

/// A group by catalog name: `C<n>`, `S<n>`, `A<n>`, `D<2n>`, `Q8`, `V4`.
pub fn group(name: &str) -> Result<FiniteSemigroup> {
    let name = name.trim();
    let num = |s: &str| s.parse::<usize>().ok();
    let g = match (name.get(..1), name.get(1..).and_then(num)) {
        (Some("C"), Some(n)) if n >= 1 => cyclic(n),
        (Some("S"), Some(n)) if n >= 1 => symmetric(n),
        (Some("A"), Some(n)) if n >= 1 => alternating(n),
        (Some("D"), Some(n)) if n >= 4 && n % 2 == 0 => dihedral(n / 2),
        (Some("Q"), Some(8)) => quaternion(),
        (Some("V"), Some(4)) => closure(vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]),
        _ => return input(format!("unknown group {name:?}")),
    };
    Ok(g)
}

/// Canonical (left-multiplication) semiautomaton of a catalog group.
pub fn canonical(name: &str) -> Result<Semiautomaton> {
    Ok(canonical_group_semiautomaton(&group(name)?)?.with_name(format!("canonical({name})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(symmetric(5).len(), 120);
        assert_eq!(alternating(5).len(), 60);
        assert_eq!(alternating(4).len(), 12);
        assert_eq!(symmetric(4).len(), 24);
        assert_eq!(dihedral(4).len(), 8);
        assert_eq!(quaternion().len(), 8);
        assert_eq!(cyclic(6).len(), 6);
        assert_eq!(group("V4").unwrap().len(), 4);
    }

    #[test]
    fn quaternion_relations() {
        let q = quaternion_table();
        assert_eq!(q.op(1, 1), 4);
        assert_eq!(q.op(1, 2), 3);
        assert_eq!(q.op(2, 1), 7);
        assert!(!q.is_abelian());
        assert_eq!((0..8).filter(|&x| q.order_of(x) == 4).count(), 6);
    }
}
