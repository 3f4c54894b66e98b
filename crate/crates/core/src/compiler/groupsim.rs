//! Group simulators: stacks of layers that keep an integer encoding of the
//! running product of group elements in a few channels.

use super::assemble::{lower_all, LayerSpec};
use crate::algebra::{canonical_from_table, find_isomorphism, transition_semigroup, GroupTable};
use crate::automaton::Semiautomaton;
use crate::error::{input, Error, Result};
use crate::tkernel::{Decoder, Metrics, SparseMat, TransformerNet};

pub const BOT: usize = 0;
pub const POS: usize = 1;

/// Layers in local coordinates simulating the canonical automaton of `group`.
///
/// Dims 0 and 1 hold the padding flag and the log-position ramp; the element
/// encoding lives in `rep_dims`. The token for `h` carries `encode[h]` and the
/// final rows carry `encode[h_t ⋯ h_1]`.
#[derive(Clone, Debug)]
pub struct GroupSim {
    pub name: String,
    pub group: GroupTable,
    pub t_max: usize,
    pub dim: usize,
    pub rep_dims: Vec<usize>,
    pub rep_size: usize,
    pub encode: Vec<Vec<i64>>,
    pub layers: Vec<LayerSpec>,
}

impl GroupSim {
    /// Zero-layer simulator of the trivial group.
    pub fn trivial(t_max: usize) -> Self {
        GroupSim {
            name: "C1".into(),
            group: GroupTable::trivial(),
            t_max,
            dim: 2,
            rep_dims: vec![],
            rep_size: 1,
            encode: vec![vec![]],
            layers: vec![],
        }
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dims.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Keeps only the elements of the subgroup `elems`; the simulator itself is unchanged.
    pub fn restrict(&self, elems: &[usize]) -> Result<GroupSim> {
        let (table, map) = self.group.restrict(elems)?;
        Ok(GroupSim {
            name: format!("{}|{}", self.name, elems.len()),
            group: table,
            encode: map.iter().map(|&g| self.encode[g].clone()).collect(),
            ..self.clone()
        })
    }

    pub(crate) fn check_encoding(&self) -> Result<()> {
        if self.encode.len() != self.group.n || self.encode.iter().any(|e| e.len() != self.rep_dim()) {
            return input("encoding does not match the group");
        }
        if self.encode[self.group.identity].iter().any(|&v| v != 0) {
            return input("identity must encode to zero");
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.encode {
            if e.iter().any(|&v| v < 0 || v >= self.rep_size as i64) || !seen.insert(e) {
                return input("encoding is not injective into [0, rep_size)");
            }
        }
        Ok(())
    }

    /// Positional rows for the padding row and positions `1..=t_max`.
    pub(crate) fn positional(&self, d: usize) -> SparseMat {
        let t = self.t_max as f64;
        let mut pos = SparseMat::zeros(self.t_max + 1, d);
        for i in 0..=self.t_max {
            pos.push(i, POS, (2.0 * t - i as f64).ln());
        }
        pos
    }

    /// Net over the alphabet `labels` where symbol `i` acts as `elems[i]` and
    /// the final code of element `g` decodes to `decode(g)`.
    pub fn net_for(
        &self,
        construction: &str,
        labels: Vec<String>,
        elems: &[usize],
        decode: &dyn Fn(usize) -> usize,
    ) -> Result<TransformerNet> {
        self.check_encoding()?;
        let d = self.dim;
        let mut enc = SparseMat::zeros(labels.len(), d);
        for (s, &g) in elems.iter().enumerate() {
            for (k, &v) in self.encode[g].iter().enumerate() {
                enc.push(s, self.rep_dims[k], v as f64);
            }
        }
        let mut pad = SparseMat::zeros(1, d);
        pad.push(0, BOT, 1.0);
        let table = (0..self.group.n).map(|g| (self.encode[g].clone(), decode(g))).collect();
        TransformerNet::assemble(
            construction,
            self.t_max,
            labels,
            enc,
            pad,
            self.positional(d),
            lower_all(&self.layers, d)?,
            Decoder::RoundLookup { dims: self.rep_dims.clone(), table },
        )
    }

    /// Net for the canonical automaton of `group`, started at the identity.
    pub fn canonical_net(&self) -> Result<TransformerNet> {
        let a = canonical_from_table(&self.group);
        let elems: Vec<usize> = (0..self.group.n).collect();
        self.net_for(&format!("group-sim:{}", self.name), a.alphabet().to_vec(), &elems, &|g| g)
    }

    pub fn canonical_automaton(&self) -> Semiautomaton {
        canonical_from_table(&self.group)
    }

    pub fn metrics(&self) -> Result<Metrics> {
        Ok(self.canonical_net()?.metrics)
    }
}

/// Net simulating a group semiautomaton `a` from `q0` with `sim`, whose group
/// must be isomorphic to the transition group of `a`.
pub fn group_automaton_net(sim: &GroupSim, a: &Semiautomaton, q0: usize, construction: &str) -> Result<TransformerNet> {
    if q0 >= a.num_states() {
        return input(format!("q0={q0} out of range"));
    }
    let s = transition_semigroup(a)?;
    if !s.is_group() {
        return input("transition semigroup is not a group");
    }
    let (table, map) = GroupTable::from_semigroup(&s)?;
    let mut pos = vec![usize::MAX; s.len()];
    for (i, &x) in map.iter().enumerate() {
        pos[x] = i;
    }
    let sym: Vec<usize> = a
        .transition_maps()
        .iter()
        .map(|f| pos[s.index_of(f).expect("generator is in its closure")])
        .collect();
    let mut gens = sym.clone();
    gens.sort_unstable();
    gens.dedup();
    let psi = find_isomorphism(&table, &gens, &sim.group).ok_or_else(|| {
        Error::Input(format!("transition group of order {} is not isomorphic to the simulated group", table.n))
    })?;
    let mut inv = vec![0; table.n];
    for (g, &h) in psi.iter().enumerate() {
        inv[h] = g;
    }
    let elems: Vec<usize> = sym.iter().map(|&g| psi[g]).collect();
    let decode = |h: usize| s.elements[map[inv[h]]].apply(q0);
    sim.net_for(construction, a.alphabet().to_vec(), &elems, &decode)
}
