//! Permutation-reset automata: a group simulator for the bijections plus one
//! layer that finds the latest reset and applies `Φ(g_t · g_r⁻¹)` to it.

use super::assemble::{lower_all, Branch, LayerSpec};
use super::groupsim::GroupSim;
use super::memory::latest_write_head;
use super::report::{norm, CompileReport};
use super::solvable::compile_solvable_group;
use crate::algebra::{semigroup_closure, GroupTable, Transformation};
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};
use crate::tkernel::{build_interp_mlp_nd, Decoder, SparseMat, TransformerNet};

/// Dims shared by every component of a net.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shared {
    pub bot: usize,
    pub pos: usize,
    pub mr: usize,
    pub mc: usize,
}

/// What a symbol does to a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Perm(usize),
    Reset(usize),
}

/// A permutation-reset automaton laid out in a private block of dims.
///
/// Block layout: the group simulator's private dims, then `MV, MB, IV`,
/// the copied group code `IG`, and `OUT`.
pub(crate) struct Component {
    pub states: usize,
    pub q0: usize,
    pub sim: GroupSim,
    actions: Vec<Action>,
    /// `Φ(g)` for every element of `sim.group`.
    perms: Vec<Vec<usize>>,
    pub report: CompileReport,
}

impl Component {
    pub fn build(a: &Semiautomaton, q0: usize, t_max: usize) -> Result<Component> {
        if q0 >= a.num_states() {
            return input(format!("q0={q0} out of range"));
        }
        let n = a.num_states();
        let maps = a.transition_maps();
        let mut perm_maps: Vec<Transformation> = vec![];
        let mut kinds = vec![];
        for (s, f) in maps.iter().enumerate() {
            if f.is_permutation() {
                perm_maps.push(f.clone());
                kinds.push(None);
            } else if let Some(c) = f.constant_value() {
                kinds.push(Some(c));
            } else {
                return input(format!("symbol {:?} is neither a bijection nor a reset", a.alphabet()[s]));
            }
        }
        let (table, elements) = if perm_maps.is_empty() {
            (GroupTable::trivial(), vec![Transformation::identity(n)])
        } else {
            let s = semigroup_closure(&perm_maps)?;
            let (t, map) = GroupTable::from_semigroup(&s)?;
            let els = map.iter().map(|&i| s.elements[i].clone()).collect();
            (t, els)
        };
        let (sim, report) = compile_solvable_group(&table, t_max, n)?;
        let actions = maps
            .iter()
            .zip(&kinds)
            .map(|(f, k)| match k {
                Some(c) => Action::Reset(*c),
                None => Action::Perm(elements.iter().position(|e| e == f).expect("generator in its group")),
            })
            .collect();
        let perms = elements.iter().map(|e| e.image().to_vec()).collect();
        Ok(Component { states: n, q0, sim, actions, perms, report })
    }

    fn sim_private(&self) -> usize {
        self.sim.dim - 2
    }

    pub fn block_size(&self) -> usize {
        self.sim_private() + 4 + self.sim.rep_dim()
    }

    fn mv(&self, base: usize) -> usize {
        base + self.sim_private()
    }

    fn mb(&self, base: usize) -> usize {
        self.mv(base) + 1
    }

    fn iv(&self, base: usize) -> usize {
        self.mv(base) + 2
    }

    fn ig(&self, base: usize, i: usize) -> usize {
        self.mv(base) + 3 + i
    }

    pub fn out(&self, base: usize) -> usize {
        self.mv(base) + 3 + self.sim.rep_dim()
    }

    fn sim_map(&self, sh: Shared, base: usize) -> impl Fn(usize) -> usize {
        move |i| match i {
            0 => sh.bot,
            1 => sh.pos,
            _ => base + i - 2,
        }
    }

    fn rep(&self, sh: Shared, base: usize) -> Vec<usize> {
        let map = self.sim_map(sh, base);
        self.sim.rep_dims.iter().map(|&i| map(i)).collect()
    }

    /// Dims a token writes: the group code, `MV` and `MB`.
    pub fn input_dims(&self, sh: Shared, base: usize) -> Vec<usize> {
        let mut v = self.rep(sh, base);
        v.push(self.mv(base));
        v.push(self.mb(base));
        v
    }

    /// Values for [`Self::input_dims`] of symbol `sigma`.
    pub fn token(&self, sigma: usize) -> Vec<f64> {
        let r = self.sim.rep_dim();
        match self.actions[sigma] {
            Action::Perm(g) => {
                let mut v: Vec<f64> = self.sim.encode[g].iter().map(|&x| x as f64).collect();
                v.extend([0.0, 1.0]);
                v
            }
            Action::Reset(c) => {
                let mut v = vec![0.0; r];
                v.extend([c as f64, 0.0]);
                v
            }
        }
    }

    /// Values for [`Self::input_dims`] at the padding row.
    pub fn pad(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.sim.rep_dim()];
        v.extend([self.q0 as f64, 0.0]);
        v
    }

    pub fn scale(&self, t_max: usize) -> f64 {
        let t = t_max as f64;
        t * (16.0 * self.states.max(self.sim.rep_size) as f64 * t).ln()
    }

    pub fn layers(&self, d: usize, sh: Shared, base: usize) -> Result<Vec<LayerSpec>> {
        let map = self.sim_map(sh, base);
        let mut layers: Vec<LayerSpec> = self.sim.layers.iter().map(|l| l.relocate(d, &map)).collect();
        let rep = self.rep(sh, base);
        let r = rep.len();
        let mut copies = vec![(self.mv(base), self.iv(base))];
        copies.extend((0..r).map(|i| (rep[i], self.ig(base, i))));
        let head = latest_write_head(d, sh.mc, self.mb(base), sh.mr, self.scale(self.sim.t_max), &copies);
        let g = &self.sim.group;
        let mut table = Vec::with_capacity(g.n * g.n * self.states);
        for x in 0..g.n {
            for y in 0..g.n {
                let phi = &self.perms[g.op(x, g.inv[y])];
                for q in 0..self.states {
                    let mut key: Vec<f64> = self.sim.encode[x].iter().map(|&v| v as f64).collect();
                    key.extend(self.sim.encode[y].iter().map(|&v| v as f64));
                    key.push(q as f64);
                    table.push((key, vec![phi[q] as f64]));
                }
            }
        }
        let bx = (self.sim.rep_size.max(self.states) - 1) as f64;
        let mlp = build_interp_mlp_nd(&table, 1.0, bx, (self.states - 1) as f64)?;
        let mut inputs = rep.clone();
        inputs.extend((0..r).map(|i| self.ig(base, i)));
        inputs.push(self.iv(base));
        layers.push(LayerSpec {
            heads: vec![head],
            attn_writes: copies.iter().map(|c| c.1).collect(),
            branches: vec![Branch::over(&mlp, d, &inputs, vec![self.out(base)])],
        });
        Ok(layers)
    }

    pub fn depth(&self) -> usize {
        self.sim.depth() + 1
    }
}

/// Positional rows `0..=T` with the log ramp, the linear ramp and a constant.
pub(crate) fn ramp_positions(pos: &mut SparseMat, sh: Shared, t_max: usize) {
    let t = t_max as f64;
    for i in 0..=t_max {
        pos.push(i, sh.pos, (2.0 * t - i as f64).ln());
        pos.push(i, sh.mr, i as f64 / t);
        pos.push(i, sh.mc, 1.0);
    }
}

pub fn compile_permutation_reset(a: &Semiautomaton, q0: usize, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    if t_max < 1 {
        return input("T must be at least 1");
    }
    let comp = Component::build(a, q0, t_max)?;
    let sh = Shared { bot: 0, pos: 1, mr: 2, mc: 3 };
    let base = 4;
    let d = base + comp.block_size();
    let layers = comp.layers(d, sh, base)?;
    let dims = comp.input_dims(sh, base);
    let mut enc = SparseMat::zeros(a.num_symbols(), d);
    for s in 0..a.num_symbols() {
        for (&k, v) in dims.iter().zip(comp.token(s)) {
            enc.push(s, k, v);
        }
    }
    let mut pad = SparseMat::zeros(1, d);
    pad.push(0, sh.bot, 1.0);
    for (&k, v) in dims.iter().zip(comp.pad()) {
        pad.push(0, k, v);
    }
    let mut pos = SparseMat::zeros(t_max + 1, d);
    ramp_positions(&mut pos, sh, t_max);
    let net = TransformerNet::assemble(
        "permutation-reset",
        t_max,
        a.alphabet().to_vec(),
        enc,
        pad,
        pos,
        lower_all(&layers, d)?,
        Decoder::RoundCoord { dim: comp.out(base), offset: 0.0, num_states: comp.states },
    )?;
    let m = net.metrics.clone();
    let (g, q, n, t) = (comp.sim.group.n as f64, comp.states as f64, comp.states as f64, t_max as f64);
    let mut r = CompileReport::new("permutation-reset", t_max, m.clone());
    r.equals("depth", m.depth as f64, comp.sim.depth() as f64 + 1.0)
        .at_most("mlp_width", m.mlp_width as f64, 20.0 * n * t * g + 4.0 * q + g * g * q)
        .at_most("norm", norm(&m), comp.report.metrics.max_abs_weight.max(comp.scale(t_max)).max(6.0 * n * t));
    for c in comp.report.checks.iter().filter(|c| !c.pass) {
        r.checks.push(c.clone());
    }
    Ok((net, r))
}
