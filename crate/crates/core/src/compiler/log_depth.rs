//! Parallel-prefix construction: layer `l` composes the map at `t` with the
//! map at `t − 2^{l−1}`, so `⌈log₂ T⌉` layers give every prefix.

use super::assemble::{lower_all, Branch, LayerSpec};
use super::report::{norm, CompileReport};
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};
use crate::tkernel::gadgets::COMPOSITION_NOISE;
use crate::tkernel::{build_composition_mlp, rotation, Decoder, Head, SparseMat, TransformerNet};
use std::f64::consts::PI;

/// Attention temperature `100·T²·(log|Q| + log T)`.
pub fn log_depth_temperature(states: usize, t_pow: usize) -> f64 {
    let t = t_pow as f64;
    100.0 * t * t * ((states as f64).ln() + t.ln())
}

/// Worst-case soft-attention error per coordinate for a head whose target
/// beats every other of the `rows` rows by `gap` on scores.
fn selection_error(rows: usize, gap: f64, value_range: f64) -> f64 {
    rows as f64 * (-gap).exp() * value_range
}

pub fn compile_log_depth(a: &Semiautomaton, q0: usize, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    if t_max < 1 {
        return input("T must be at least 1");
    }
    if q0 >= a.num_states() {
        return input(format!("q0={q0} out of range"));
    }
    let real = a.num_states();
    // a dummy state keeps the map vectors at least 2-wide
    let n = real.max(2);
    let tp = t_max.next_power_of_two();
    let depth = tp.trailing_zeros() as usize;
    let d = 2 * n + 2;
    let (l_dim, r_dim, p1, p2) = (|q: usize| q, move |q: usize| n + q, 2 * n, 2 * n + 1);

    let mut gamma = log_depth_temperature(n, tp);
    // the nearest competitor on the circle of period 2T sits at angle π/T
    let gap = |g: f64| g * (1.0 - (PI / tp as f64).cos());
    while selection_error(2 * tp, gap(gamma), n as f64) > COMPOSITION_NOISE / 10.0 {
        gamma *= 2.0;
    }
    let s = gamma.sqrt();

    let comp = build_composition_mlp(n);
    let comp_inputs: Vec<usize> = (0..n).map(l_dim).chain((0..n).map(r_dim)).collect();
    let mut layers = Vec::with_capacity(depth);
    for l in 1..=depth {
        let offset = (1usize << (l - 1)) as f64;
        let rot = rotation(-PI * offset / tp as f64);
        let select = |rotated: bool, write: &dyn Fn(usize) -> usize| {
            let mut wq = SparseMat::zeros(d, n);
            let mut wk = SparseMat::zeros(d, n);
            for (i, &pi) in [p1, p2].iter().enumerate() {
                for j in 0..2 {
                    let v = if rotated { rot[i][j] } else { (i == j) as u8 as f64 };
                    wq.push(pi, j, s * v);
                }
                wk.push(pi, i, s);
            }
            let mut wv = SparseMat::zeros(d, n);
            let mut wc = SparseMat::zeros(n, d);
            for q in 0..n {
                wv.push(r_dim(q), q, 1.0);
                wc.push(q, write(q), 1.0);
            }
            Head { wq, wk, wv, wc }
        };
        let heads = vec![select(true, &l_dim), select(false, &r_dim)];
        let writes = (0..n).map(l_dim).chain((0..n).map(r_dim)).collect();
        let branch = Branch::over(&comp, d, &comp_inputs, (0..n).map(r_dim).collect());
        layers.push(LayerSpec { heads, attn_writes: writes, branches: vec![branch] });
    }

    let delta = |q: usize, sigma: usize| if q < real { a.step(q, sigma) } else { q };
    let mut enc = SparseMat::zeros(a.num_symbols(), d);
    for sigma in 0..a.num_symbols() {
        for q in 0..n {
            enc.push(sigma, r_dim(q), (delta(q, sigma) + 1) as f64);
        }
    }
    let mut pad = SparseMat::zeros(tp, d);
    for i in 0..tp {
        for q in 0..n {
            pad.push(i, r_dim(q), (q0 + 1) as f64);
        }
    }
    let mut pos = SparseMat::zeros(2 * tp, d);
    for i in 0..2 * tp {
        let angle = PI * (i as f64 - tp as f64 + 1.0) / tp as f64;
        pos.push(i, p1, angle.cos());
        pos.push(i, p2, angle.sin());
    }
    let net = TransformerNet::assemble(
        "log-depth",
        tp,
        a.alphabet().to_vec(),
        enc,
        pad,
        pos,
        lower_all(&layers, d)?,
        Decoder::RoundCoord { dim: r_dim(q0), offset: 1.0, num_states: real },
    )?;

    let m = net.metrics.clone();
    let (q, t) = (n as f64, tp as f64);
    let mut r = CompileReport::new("log-depth", tp, m.clone());
    r.equals("depth", m.depth as f64, (t_max as f64).log2().ceil())
        .equals("embed_dim", m.embed_dim as f64, 2.0 * q + 2.0)
        .at_most("heads", m.max_heads as f64, 2.0)
        .at_most("mlp_width", m.mlp_width as f64, q * q + q)
        .at_most("norm", norm(&m), (4.0 * q + 2.0).max(10.0 * t * (q.ln() + t.ln()).sqrt()));
    if gamma > log_depth_temperature(n, tp) {
        r.note(format!("temperature raised to {gamma} to meet the composition noise budget"));
    }
    if real < 2 {
        r.note("added a dummy state");
    }
    Ok((net, r))
}
