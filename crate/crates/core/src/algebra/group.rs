use super::semigroup::FiniteSemigroup;
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// Multiplication table of a finite group on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    pub n: usize,
    pub mul: Vec<Vec<usize>>,
    pub identity: usize,
    pub inv: Vec<usize>,
}

/// Chain `G = H_0 ▷ H_1 ▷ … ▷ H_m = 1` with `factor_orders[i] = |H_i| / |H_{i+1}|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionSeries {
    pub chain: Vec<Vec<usize>>,
    pub factor_orders: Vec<usize>,
}

impl GroupTable {
    pub fn from_mul(mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 {
            return input("empty group table");
        }
        if mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return input("group table is not closed");
        }
        let Some(identity) = (0..n).find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a)) else {
            return input("no identity element");
        };
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| mul[a][b] == identity && mul[b][a] == identity) {
                Some(b) => inv[a] = b,
                None => return input(format!("element {a} has no inverse")),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b];
                for c in 0..n {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return input("table is not associative");
                    }
                }
            }
        }
        Ok(GroupTable { n, mul, identity, inv })
    }

    fn from_mul_trusted(mul: Vec<Vec<usize>>, identity: usize) -> Self {
        let n = mul.len();
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n).find(|&b| mul[a][b] == identity).expect("group element has inverse");
        }
        GroupTable { n, mul, identity, inv }
    }

    /// Group table of a semigroup that is a group, relabeled so the identity
    /// is element 0. The second value maps table indices to semigroup indices.
    pub fn from_semigroup(s: &FiniteSemigroup) -> Result<(Self, Vec<usize>)> {
        if !s.is_group() {
            return input("semigroup is not a group");
        }
        let all: Vec<usize> = (0..s.len()).collect();
        restrict_semigroup(s, &all)
    }

    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_mul_trusted(mul, 0)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul[acc][a])
    }

    pub fn order_of(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul[x][a];
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    /// A generator if the group is cyclic.
    pub fn cyclic_generator(&self) -> Option<usize> {
        (0..self.n).find(|&a| self.order_of(a) == self.n)
    }

    /// Sorted subgroup generated by `gens`.
    pub fn generate(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul[g][x];
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    pub fn conjugacy_classes_within(&self, h: &[usize]) -> Vec<Vec<usize>> {
        let mut done = vec![false; self.n];
        let mut classes = Vec::new();
        for &x in h {
            if done[x] {
                continue;
            }
            let class: BTreeSet<usize> = h.iter().map(|&g| self.mul[self.mul[g][x]][self.inv[g]]).collect();
            for &c in &class {
                done[c] = true;
            }
            classes.push(class.into_iter().collect());
        }
        classes
    }

    /// All normal subgroups of the subgroup `h`, each sorted.
    pub fn normal_subgroups_of(&self, h: &[usize]) -> Vec<Vec<usize>> {
        let classes = self.conjugacy_classes_within(h);
        let trivial = vec![self.identity];
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::from([trivial.clone()]);
        let mut queue = VecDeque::from([trivial]);
        while let Some(nrm) = queue.pop_front() {
            for c in &classes {
                if c.iter().all(|x| nrm.binary_search(x).is_ok()) {
                    continue;
                }
                let mut gens = nrm.clone();
                gens.extend_from_slice(c);
                let next = self.generate(&gens);
                if found.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        found.into_iter().collect()
    }

    pub fn derived_subgroup(&self, h: &[usize]) -> Vec<usize> {
        let mut comms = BTreeSet::new();
        for &a in h {
            for &b in h {
                comms.insert(self.mul[self.mul[a][b]][self.mul[self.inv[a]][self.inv[b]]]);
            }
        }
        self.generate(&comms.into_iter().collect::<Vec<_>>())
    }

    pub fn derived_series(&self) -> Vec<Vec<usize>> {
        let mut series = vec![(0..self.n).collect::<Vec<_>>()];
        for _ in 0..self.n {
            let last = series.last().unwrap();
            let next = self.derived_subgroup(last);
            if next.len() == last.len() {
                break;
            }
            series.push(next);
        }
        series
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().map(|s| s.len()) == Some(1)
    }

    /// Composition chain choosing, at every step, the largest maximal proper
    /// normal subgroup (ties broken by the lexicographically smallest set).
    pub fn composition_series(&self) -> CompositionSeries {
        let mut chain = vec![(0..self.n).collect::<Vec<_>>()];
        let mut factor_orders = Vec::new();
        loop {
            let h = chain.last().unwrap().clone();
            if h.len() == 1 {
                break;
            }
            let normals = self.normal_subgroups_of(&h);
            let proper: Vec<&Vec<usize>> = normals.iter().filter(|s| s.len() < h.len()).collect();
            let maximal = proper.iter().copied().filter(|s| {
                !proper.iter().any(|t| t.len() > s.len() && s.iter().all(|x| t.binary_search(x).is_ok()))
            });
            let next = maximal
                .min_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)))
                .expect("trivial subgroup is always proper")
                .clone();
            factor_orders.push(h.len() / next.len());
            chain.push(next);
        }
        CompositionSeries { chain, factor_orders }
    }

    /// Table of the subgroup `subset` with its identity relabeled to 0.
    pub fn restrict(&self, subset: &[usize]) -> Result<(GroupTable, Vec<usize>)> {
        let mut elems = vec![self.identity];
        elems.extend(subset.iter().copied().filter(|&x| x != self.identity));
        if elems.len() != subset.len() {
            return input("subset must contain the identity exactly once");
        }
        let mut pos = vec![usize::MAX; self.n];
        for (i, &x) in elems.iter().enumerate() {
            pos[x] = i;
        }
        let mut mul = vec![vec![0; elems.len()]; elems.len()];
        for (i, &a) in elems.iter().enumerate() {
            for (j, &b) in elems.iter().enumerate() {
                let p = pos[self.mul[a][b]];
                if p == usize::MAX {
                    return input("subset is not closed under multiplication");
                }
                mul[i][j] = p;
            }
        }
        Ok((Self::from_mul_trusted(mul, 0), elems))
    }

    /// `A × B` with `(a, b)` stored at `a + |A|·b`.
    pub fn direct_product(a: &GroupTable, b: &GroupTable) -> GroupTable {
        let n = a.n * b.n;
        let mul = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| a.mul[x % a.n][y % a.n] + a.n * b.mul[x / a.n][y / a.n])
                    .collect()
            })
            .collect();
        Self::from_mul_trusted(mul, a.identity + a.n * b.identity)
    }

    /// `N ⋊_φ H` with `(g, h)(g', h') = (g·φ_h(g'), h·h')` and `(g, h)` at `g + |N|·h`.
    /// `phi[h][g] = φ_h(g)`.
    pub fn semidirect_product(nt: &GroupTable, ht: &GroupTable, phi: &[Vec<usize>]) -> Result<GroupTable> {
        validate_action(nt, ht, phi)?;
        let n = nt.n * ht.n;
        let mul = (0..n)
            .map(|x| {
                let (g, h) = (x % nt.n, x / nt.n);
                (0..n)
                    .map(|y| {
                        let (g2, h2) = (y % nt.n, y / nt.n);
                        nt.mul[g][phi[h][g2]] + nt.n * ht.mul[h][h2]
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_mul_trusted(mul, nt.identity + nt.n * ht.identity))
    }

    /// Left-regular permutations `x ↦ a·x`.
    pub fn left_regular(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|a| (0..self.n).map(|x| self.mul[a][x]).collect()).collect()
    }
}

/// Checks that every `φ_h` is an automorphism of `N` and that `h ↦ φ_h` is a homomorphism.
pub fn validate_action(nt: &GroupTable, ht: &GroupTable, phi: &[Vec<usize>]) -> Result<()> {
    if phi.len() != ht.n || phi.iter().any(|r| r.len() != nt.n) {
        return input("phi table has the wrong shape");
    }
    for (h, p) in phi.iter().enumerate() {
        let mut seen = vec![false; nt.n];
        for &x in p {
            if x >= nt.n || seen[x] {
                return input(format!("φ_{h} is not a bijection"));
            }
            seen[x] = true;
        }
        for a in 0..nt.n {
            for b in 0..nt.n {
                if p[nt.mul[a][b]] != nt.mul[p[a]][p[b]] {
                    return input(format!("φ_{h} is not a homomorphism of N"));
                }
            }
        }
    }
    for h1 in 0..ht.n {
        for h2 in 0..ht.n {
            let h12 = ht.mul[h1][h2];
            if (0..nt.n).any(|g| phi[h12][g] != phi[h1][phi[h2][g]]) {
                return input(format!("φ is not a homomorphism at ({h1}, {h2})"));
            }
        }
    }
    Ok(())
}

fn restrict_semigroup(s: &FiniteSemigroup, subset: &[usize]) -> Result<(GroupTable, Vec<usize>)> {
    let mut pos = vec![usize::MAX; s.len()];
    for (i, &x) in subset.iter().enumerate() {
        pos[x] = i;
    }
    let mut mul = vec![vec![0; subset.len()]; subset.len()];
    for (i, &a) in subset.iter().enumerate() {
        for (j, &b) in subset.iter().enumerate() {
            let p = pos[s.mul(a, b)];
            if p == usize::MAX {
                return input("subset is not closed");
            }
            mul[i][j] = p;
        }
    }
    let g = GroupTable::from_mul(mul)?;
    let (g2, perm) = g.restrict(&(0..g.n).collect::<Vec<_>>())?;
    Ok((g2, perm.into_iter().map(|i| subset[i]).collect()))
}

/// Group table of the subgroup `subset` of `s` (identity first), plus the
/// index map back into `s`.
pub fn subgroup_table(s: &FiniteSemigroup, subset: &[usize]) -> Result<(GroupTable, Vec<usize>)> {
    restrict_semigroup(s, subset)
}

pub fn is_solvable_group(s: &FiniteSemigroup) -> Result<bool> {
    Ok(GroupTable::from_semigroup(s)?.0.is_solvable())
}

/// Composition series with chain members given as semigroup indices.
pub fn composition_series(s: &FiniteSemigroup) -> Result<CompositionSeries> {
    let (g, map) = GroupTable::from_semigroup(s)?;
    let mut cs = g.composition_series();
    for h in &mut cs.chain {
        let mut mapped: Vec<usize> = h.iter().map(|&i| map[i]).collect();
        mapped.sort_unstable();
        *h = mapped;
    }
    Ok(cs)
}

/// `Q = Σ = G` with `δ(g, h) = h·g`; the identity is state 0 and symbol `e`.
pub fn canonical_group_semiautomaton(s: &FiniteSemigroup) -> Result<Semiautomaton> {
    let (g, _) = GroupTable::from_semigroup(s)?;
    Ok(canonical_from_table(&g))
}

pub fn canonical_from_table(g: &GroupTable) -> Semiautomaton {
    let alphabet = (0..g.n)
        .map(|i| if i == g.identity { "e".to_string() } else { format!("g{i}") })
        .collect();
    let delta = g.left_regular();
    Semiautomaton::new(g.n, alphabet, delta).expect("left-regular table is valid")
}

/// An isomorphism `src → dst` determined by images of `src_gens`, found by
/// backtracking over candidate images with matching element orders.
pub fn find_isomorphism(src: &GroupTable, src_gens: &[usize], dst: &GroupTable) -> Option<Vec<usize>> {
    if src.n != dst.n {
        return None;
    }
    let orders: Vec<usize> = src_gens.iter().map(|&g| src.order_of(g)).collect();
    let candidates: Vec<Vec<usize>> = orders
        .iter()
        .map(|&o| (0..dst.n).filter(|&x| dst.order_of(x) == o).collect())
        .collect();
    let mut choice = vec![0; src_gens.len()];
    fn extend(src: &GroupTable, gens: &[usize], dst: &GroupTable, images: &[usize]) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; src.n];
        map[src.identity] = dst.identity;
        let mut queue = VecDeque::from([src.identity]);
        while let Some(x) = queue.pop_front() {
            for (k, &g) in gens.iter().enumerate() {
                let y = src.mul[g][x];
                let want = dst.mul[images[k]][map[x]];
                if map[y] == usize::MAX {
                    map[y] = want;
                    queue.push_back(y);
                } else if map[y] != want {
                    return None;
                }
            }
        }
        let mut seen = vec![false; dst.n];
        for &m in &map {
            if m == usize::MAX || seen[m] {
                return None;
            }
            seen[m] = true;
        }
        Some(map)
    }
    fn search(
        k: usize,
        src: &GroupTable,
        gens: &[usize],
        dst: &GroupTable,
        cands: &[Vec<usize>],
        choice: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        if k == gens.len() {
            return extend(src, gens, dst, choice);
        }
        for &c in &cands[k] {
            choice[k] = c;
            if let Some(m) = search(k + 1, src, gens, dst, cands, choice) {
                return Some(m);
            }
        }
        None
    }
    search(0, src, src_gens, dst, &candidates, &mut choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalog;

    #[test]
    fn cyclic_basics() {
        let c6 = GroupTable::cyclic(6);
        assert!(c6.is_solvable() && c6.is_abelian());
        let cs = c6.composition_series();
        let mut f = cs.factor_orders.clone();
        f.sort();
        assert_eq!(f, vec![2, 3]);
        assert_eq!(cs.chain.len(), 3);
    }

    #[test]
    fn s4_series() {
        let (s4, _) = GroupTable::from_semigroup(&catalog::symmetric(4)).unwrap();
        assert!(s4.is_solvable());
        let sizes: Vec<usize> = s4.derived_series().iter().map(|h| h.len()).collect();
        assert_eq!(sizes, vec![24, 12, 4, 1]);
        let mut f = s4.composition_series().factor_orders;
        f.sort();
        assert_eq!(f, vec![2, 2, 2, 3]);
    }

    #[test]
    fn a5_not_solvable() {
        let (a5, _) = GroupTable::from_semigroup(&catalog::alternating(5)).unwrap();
        assert_eq!(a5.n, 60);
        assert!(!a5.is_solvable());
        assert_eq!(a5.composition_series().factor_orders, vec![60]);
    }

    #[test]
    fn semidirect_dihedral() {
        let c4 = GroupTable::cyclic(4);
        let c2 = GroupTable::cyclic(2);
        let phi = vec![(0..4).collect(), (0..4).map(|g| (4 - g) % 4).collect()];
        let d8 = GroupTable::semidirect_product(&c4, &c2, &phi).unwrap();
        assert!(!d8.is_abelian());
        let bad = vec![(0..4).collect(), vec![0, 2, 1, 3]];
        assert!(GroupTable::semidirect_product(&c4, &c2, &bad).is_err());
    }

    #[test]
    fn isomorphism_c2xc3_c6() {
        let p = GroupTable::direct_product(&GroupTable::cyclic(2), &GroupTable::cyclic(3));
        let c6 = GroupTable::cyclic(6);
        let m = find_isomorphism(&c6, &[1], &p).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(m[c6.op(a, b)], p.op(m[a], m[b]));
            }
        }
        assert!(find_isomorphism(&c6, &[1], &GroupTable::from_semigroup(&catalog::symmetric(3)).unwrap().0).is_none());
    }

    #[test]
    fn canonical_c2_is_parity() {
        let c2 = canonical_from_table(&GroupTable::cyclic(2));
        assert_eq!(c2.delta(), crate::automaton::Semiautomaton::parity().delta());
        assert_eq!(c2.alphabet()[0], "e");
    }
}
