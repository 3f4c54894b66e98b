use super::assemble::{Branch, LayerSpec};
use super::groupsim::{GroupSim, BOT, POS};
use super::report::{norm, CompileReport};
use crate::algebra::GroupTable;
use crate::error::{input, Result};
use crate::tkernel::{build_interp_mlp_1d, Head, SparseMat};

const VAL: usize = 2;

/// Modular counter `q_t = Σ s_j mod n` in one layer.
///
/// The padding row absorbs attention mass `(2T − t)/(2T)`, so the head
/// returns `Σ s_j / 2T` and the MLP memorizes `m/2T ↦ m mod n`.
pub fn compile_mod_counter(n: usize, t_max: usize) -> Result<GroupSim> {
    if n < 2 {
        return input("counter needs n ≥ 2");
    }
    if t_max < 1 {
        return input("T must be at least 1");
    }
    let d = 3;
    let one = |rows: usize, from: usize| {
        let mut m = SparseMat::zeros(rows, 1);
        m.push(from, 0, 1.0);
        m
    };
    let mut wc = SparseMat::zeros(1, d);
    wc.push(0, VAL, 1.0);
    let head = Head { wq: one(d, POS), wk: one(d, BOT), wv: one(d, VAL), wc };
    let tt = 2.0 * t_max as f64;
    let table: Vec<(f64, Vec<f64>)> =
        (0..=(n - 1) * t_max).map(|m| (m as f64 / tt, vec![(m % n) as f64])).collect();
    let mlp = build_interp_mlp_1d(&table, 1.0 / tt, (n - 1) as f64 / 2.0, (n - 1) as f64)?;
    let layer = LayerSpec { heads: vec![head], attn_writes: vec![VAL], branches: vec![Branch::over(&mlp, d, &[VAL], vec![VAL])] };
    Ok(GroupSim {
        name: format!("C{n}"),
        group: GroupTable::cyclic(n),
        t_max,
        dim: d,
        rep_dims: vec![VAL],
        rep_size: n,
        encode: (0..n as i64).map(|k| vec![k]).collect(),
        layers: vec![layer],
    })
}

/// Size checks of a single counter.
pub fn counter_report(sim: &GroupSim) -> Result<CompileReport> {
    let m = sim.metrics()?;
    let n = sim.group.n as f64;
    let t = sim.t_max as f64;
    let mut r = CompileReport::new(format!("counter:{}", sim.name), sim.t_max, m.clone());
    r.equals("depth", m.depth as f64, 1.0)
        .equals("embed_dim", m.embed_dim as f64, 3.0)
        .equals("heads", m.max_heads as f64, 1.0)
        .equals("head_dim", m.max_head_dim as f64, 1.0)
        .at_most("mlp_width", m.mlp_width as f64, 4.0 * n * t)
        .at_most("norm", norm(&m), 4.0 * n * t + 2.0)
        .equals("rep_dim", sim.rep_dim() as f64, 1.0)
        .equals("rep_size", sim.rep_size as f64, n);
    Ok(r)
}
