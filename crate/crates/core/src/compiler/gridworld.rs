//! Two-layer simulator of `gridworld(S)`.
//!
//! Layer 1 computes the prefix sum `z_t` of the moves. Layer 2 looks up, for
//! every offset `k ∈ [−S, S]`, the latest position whose prefix sum is
//! `z_t + k`. The `S + 1` values seen most recently always form a window
//! `[z_t + a, z_t + a + S]`, and the state is `−a`.

use super::assemble::{lower_all, Branch, LayerSpec};
use super::report::CompileReport;
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};
use crate::tkernel::{build_interp_mlp_1d, rotation, Affine, Decoder, Head, Mlp, SparseMat, TransformerNet};
use std::collections::HashSet;
use std::f64::consts::{LN_2, PI};

/// Result of the reference algorithm on one sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridworldTrace {
    pub state: usize,
    /// 1-based index into the padded move sequence (`S + 1` leading `−1`s).
    pub t_final: usize,
    /// The wall (`0` or `S`) the walk touched at `t_final`.
    pub boundary: usize,
}

fn check_moves(moves: &[i8]) -> Result<()> {
    match moves.iter().find(|m| !(-1..=1).contains(*m)) {
        Some(m) => input(format!("move {m} is not -1, 0 or +1")),
        None => Ok(()),
    }
}

/// Final state of `gridworld(S)` from state 0, computed from prefix sums only.
///
/// The moves are padded with `S + 1` leading `−1`s, which pins the walk to
/// the left wall. The shortest suffix of prefix sums holding `S + 1`
/// distinct values ends a stretch that touched both walls; whichever
/// extreme came last fixes the wall the walk was on.
pub fn gridworld_final_state(moves: &[i8], s: usize) -> Result<GridworldTrace> {
    if s == 0 {
        return input("gridworld(S) needs S ≥ 1");
    }
    check_moves(moves)?;
    let mut z = Vec::with_capacity(s + 1 + moves.len());
    let mut acc = 0i64;
    for &m in std::iter::repeat(&-1i8).take(s + 1).chain(moves) {
        acc += m as i64;
        z.push(acc);
    }
    let n = z.len();
    let mut seen = HashSet::new();
    let mut uniq = n - 1;
    for i in (0..n).rev() {
        seen.insert(z[i]);
        uniq = i;
        if seen.len() == s + 1 {
            break;
        }
    }
    let suffix = &z[uniq..];
    let (lo, hi) = (*suffix.iter().min().unwrap(), *suffix.iter().max().unwrap());
    let t_min = uniq + suffix.iter().rposition(|&v| v == lo).unwrap();
    let t_max = uniq + suffix.iter().rposition(|&v| v == hi).unwrap();
    let boundary = if t_min > t_max { 0 } else { s };
    let t_final = t_min.max(t_max);
    let state = z[n - 1] - z[t_final] + boundary as i64;
    Ok(GridworldTrace { state: state as usize, t_final: t_final + 1, boundary })
}

/// [`gridworld_final_state`] on every prefix of `moves`.
pub fn gridworld_trajectory(moves: &[i8], s: usize) -> Result<Vec<usize>> {
    check_moves(moves)?;
    (1..=moves.len()).map(|t| gridworld_final_state(&moves[..t], s).map(|r| r.state)).collect()
}

/// Moves for symbols of [`Semiautomaton::gridworld`] (`L`, `⊥`, `R`).
pub fn gridworld_moves(symbols: &[usize]) -> Vec<i8> {
    symbols.iter().map(|&x| x as i8 - 1).collect()
}

const ACT: usize = 0;
const BOT: usize = 1;
const GAM: usize = 2;
const ONE: usize = 3;
const X: usize = 4;
const COS: usize = 5;
const SIN: usize = 6;

struct Layout {
    s: usize,
}

impl Layout {
    fn heads(&self) -> usize {
        2 * self.s + 1
    }
    /// Head index of offset `k ∈ [−S, S]`.
    fn idx(&self, k: i64) -> usize {
        (k + self.s as i64) as usize
    }
    fn xr(&self, k: i64) -> usize {
        7 + self.idx(k)
    }
    fn gr(&self, k: i64) -> usize {
        7 + self.heads() + self.idx(k)
    }
    fn out(&self) -> usize {
        7 + 2 * self.heads()
    }
    fn dim(&self) -> usize {
        self.out() + 1
    }
}

/// Attention parameters of the lookup layer over `rows` positions of
/// which the last `n` carry moves.
struct Lookup {
    c: f64,
    beta: f64,
    /// Smallest gap between two positional log-ramps.
    dgam: f64,
    /// Upper bound on the mass off the selected position.
    tail: f64,
}

fn lookup_params(n: usize, rows: usize, t_max: usize, s: usize) -> Lookup {
    let nf = n as f64;
    let c = PI * PI / (16.0 * LN_2 * nf * nf);
    let angle_gap = 1.0 - (PI / (2.0 * nf)).cos();
    let dgam = (2.0 * nf).ln() - (2.0 * nf - 1.0).ln();
    let per_beta = (c * dgam).min(angle_gap - c * LN_2);
    // a retrieved prefix sum must stay within 1/(8n) and a retrieved
    // log-ramp within dgam/8 of the selected position's value
    let target = (1.0 / (8.0 * nf)).min(dgam / (8.0 * LN_2)).min(1.0 / (8.0 * (t_max * (s + 1)) as f64)) / 2.0;
    let beta = (rows as f64 / target).ln() / per_beta;
    let tail = rows as f64 * (-beta * per_beta).exp();
    Lookup { c, beta, dgam, tail }
}

fn lookup_head(l: &Layout, d: usize, k: i64, n: usize, p: &Lookup) -> Head {
    let sb = p.beta.sqrt();
    let rot = rotation(k as f64 * PI / (2.0 * n as f64));
    let mut wq = SparseMat::zeros(d, 3);
    let mut wk = SparseMat::zeros(d, 3);
    wq.push(ONE, 0, -sb * p.c);
    wk.push(GAM, 0, sb);
    for (i, &pi) in [COS, SIN].iter().enumerate() {
        for j in 0..2 {
            wq.push(pi, j + 1, sb * rot[i][j]);
        }
        wk.push(pi, i + 1, sb);
    }
    let mut wv = SparseMat::zeros(d, 3);
    let mut wc = SparseMat::zeros(3, d);
    wv.push(X, 0, 1.0);
    wv.push(GAM, 1, 1.0);
    wc.push(0, l.xr(k), 1.0);
    wc.push(1, l.gr(k), 1.0);
    Head { wq, wk, wv, wc }
}

/// Boolean circuit over the lookups, written to `OUT`.
///
/// Inputs are `x_t`, the retrieved prefix sums and the retrieved ramps.
/// `e_k` says value `z_t + k` occurred; window `a` is valid when both ends
/// occurred and neither outside neighbour is more recent than the far end.
fn window_mlp(l: &Layout, n: usize, dgam: f64) -> Result<Mlp> {
    let s = l.s as i64;
    let h = l.heads();
    let xin = |k: i64| 1 + l.idx(k);
    let gin = |k: i64| 1 + h + l.idx(k);
    let d_in = 1 + 2 * h;
    let bump_delta = 1.0 / (2.0 * n as f64);
    let bump = [(2.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-2.0, 1.0)];
    let th = 1.0 / (1.5 * dgam);

    // layer 1: bumps, then thresholds c_a (a = 1−S..0) and d_a (a = −S..−1)
    let mut w1 = SparseMat::zeros(d_in, 0);
    let mut b1 = vec![];
    let unit = |w1: &mut SparseMat, b1: &mut Vec<f64>, terms: &[(usize, f64)], bias: f64| {
        let u = b1.len();
        w1.cols += 1;
        for &(i, v) in terms {
            w1.push(i, u, v);
        }
        b1.push(bias);
        u
    };
    let scale = 4.0 / bump_delta;
    let mut e_units = vec![];
    for k in -s..=s {
        let units: Vec<(usize, f64)> = bump
            .iter()
            .map(|&(off, sign)| {
                let u = unit(&mut w1, &mut b1, &[(xin(k), scale), (0, -scale)], -scale * k as f64 * bump_delta + off);
                (u, sign)
            })
            .collect();
        e_units.push(units);
    }
    let thresh = |w1: &mut SparseMat, b1: &mut Vec<f64>, pos: i64, neg: i64| {
        let terms = [(gin(pos), th), (gin(neg), -th)];
        [(unit(w1, b1, &terms, 0.5), 1.0), (unit(w1, b1, &terms, -0.5), -1.0)]
    };
    let c_units: Vec<_> = (1 - s..=0).map(|a| thresh(&mut w1, &mut b1, a - 1, a + s)).collect();
    let d_units: Vec<_> = (-s..=-1).map(|a| thresh(&mut w1, &mut b1, a + s + 1, a)).collect();
    let h1 = b1.len();

    // layer 2: p_k = e_k, u_a = e_{a−1} ∧ ¬c_a, v_a = e_{a+S+1} ∧ ¬d_a
    let mut w2 = SparseMat::zeros(h1, 0);
    let mut b2 = vec![];
    let add = |w: &mut SparseMat, b: &mut Vec<f64>, terms: Vec<(usize, f64)>, bias: f64| {
        let u = b.len();
        w.cols += 1;
        for (i, v) in terms {
            w.push(i, u, v);
        }
        b.push(bias);
        u
    };
    let e_terms = |k: i64, sign: f64| -> Vec<(usize, f64)> { e_units[l.idx(k)].iter().map(|&(u, v)| (u, sign * v)).collect() };
    let p: Vec<usize> = (-s..=s).map(|k| add(&mut w2, &mut b2, e_terms(k, 1.0), 0.0)).collect();
    let u: Vec<usize> = (1 - s..=0)
        .zip(&c_units)
        .map(|(a, cu)| {
            let mut t = e_terms(a - 1, 1.0);
            t.extend(cu.iter().map(|&(i, v)| (i, -v)));
            add(&mut w2, &mut b2, t, 0.0)
        })
        .collect();
    let v: Vec<usize> = (-s..=-1)
        .zip(&d_units)
        .map(|(a, du)| {
            let mut t = e_terms(a + s + 1, 1.0);
            t.extend(du.iter().map(|&(i, v)| (i, -v)));
            add(&mut w2, &mut b2, t, 0.0)
        })
        .collect();
    let h2 = b2.len();

    // layer 3: opt_a = e_a ∧ e_{a+S} ∧ ¬u_a ∧ ¬v_a
    let mut w3 = SparseMat::zeros(h2, 0);
    let mut b3 = vec![];
    let mut opts = vec![];
    for a in -s..=0 {
        let mut t = vec![(p[l.idx(a)], 1.0), (p[l.idx(a + s)], 1.0)];
        if a > -s {
            t.push((u[(a - 1 + s) as usize], -1.0));
        }
        if a < 0 {
            t.push((v[(a + s) as usize], -1.0));
        }
        opts.push((a, add(&mut w3, &mut b3, t, -1.0)));
    }
    let mut w4 = SparseMat::zeros(b3.len(), 1);
    for (a, o) in opts {
        if a != 0 {
            w4.push(o, 0, -a as f64);
        }
    }
    Mlp::new(vec![Affine::new(w1, b1), Affine::new(w2, b2), Affine::new(w3, b3), Affine::new(w4, vec![0.0])])
}

/// Two-layer simulator of `gridworld(S)` from state 0 with `2S + 1` heads
/// in the second layer.
pub fn compile_gridworld(s: usize, t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    if t_max < 1 {
        return input("T must be at least 1");
    }
    let a = Semiautomaton::gridworld(s)?;
    let l = Layout { s };
    let d = l.dim();
    // row 0 absorbs layer-1 attention, rows 1..=S+1 are left moves
    let pad_len = s + 2;
    let n = s + 1 + t_max;
    let rows = n + 1;
    let nf = n as f64;

    let mut wq = SparseMat::zeros(d, 1);
    wq.push(GAM, 0, 1.0);
    let mut wk = SparseMat::zeros(d, 1);
    wk.push(BOT, 0, 1.0);
    let mut wv = SparseMat::zeros(d, 1);
    wv.push(ACT, 0, 1.0);
    let mut wc = SparseMat::zeros(1, d);
    wc.push(0, X, 1.0);
    let table: Vec<(f64, Vec<f64>)> = (-(n as i64)..=n as i64)
        .map(|z| {
            let x = z as f64 / (2.0 * nf);
            (x, vec![(x * PI).cos(), (x * PI).sin()])
        })
        .collect();
    let circle = build_interp_mlp_1d(&table, 1.0 / (2.0 * nf), 0.5, 1.0)?;
    let layer1 = LayerSpec {
        heads: vec![Head { wq, wk, wv, wc }],
        attn_writes: vec![X],
        branches: vec![Branch::over(&circle, d, &[X], vec![COS, SIN])],
    };

    let p = lookup_params(n, rows, t_max, s);
    let sl = s as i64;
    let heads: Vec<Head> = (-sl..=sl).map(|k| lookup_head(&l, d, k, n, &p)).collect();
    let mut writes: Vec<usize> = (-sl..=sl).map(|k| l.xr(k)).collect();
    writes.extend((-sl..=sl).map(|k| l.gr(k)));
    let mut inputs = vec![X];
    inputs.extend(writes.iter().copied());
    let circuit = window_mlp(&l, n, p.dgam)?;
    let layer2 = LayerSpec { heads, attn_writes: writes, branches: vec![Branch::over(&circuit, d, &inputs, vec![l.out()])] };

    let mut enc = SparseMat::zeros(3, d);
    enc.push(0, ACT, -1.0);
    enc.push(2, ACT, 1.0);
    let mut pad = SparseMat::zeros(pad_len, d);
    pad.push(0, BOT, 1.0);
    for i in 1..pad_len {
        pad.push(i, ACT, -1.0);
    }
    let mut pos = SparseMat::zeros(rows, d);
    for i in 0..rows {
        pos.push(i, GAM, (2.0 * nf - i as f64).ln());
        pos.push(i, ONE, 1.0);
    }
    let net = TransformerNet::assemble(
        "gridworld",
        t_max,
        a.alphabet().to_vec(),
        enc,
        pad,
        pos,
        lower_all(&[layer1, layer2], d)?,
        Decoder::RoundCoord { dim: l.out(), offset: 0.0, num_states: s + 1 },
    )?;
    let m = net.metrics.clone();
    let attn_layers = net.layers.iter().filter(|x| !x.attn.heads.is_empty()).count();
    let mut r = CompileReport::new("gridworld", t_max, m.clone());
    r.equals("depth", m.depth as f64, 2.0)
        .equals("attention_layers", attn_layers as f64, 2.0)
        .equals("layer2_heads", net.layers[1].attn.heads.len() as f64, (2 * s + 1) as f64)
        .at_most("softmax_tail", p.tail, 1.0 / (8.0 * (t_max * (s + 1)) as f64));
    r.note(format!("lookup temperature {:.3e} over {rows} positions", p.beta));
    Ok((net, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(moves: &[i8], s: usize) -> Vec<usize> {
        let a = Semiautomaton::gridworld(s).unwrap();
        let x: Vec<usize> = moves.iter().map(|&m| (m + 1) as usize).collect();
        a.run(0, &x).unwrap().states
    }

    #[test]
    fn hand_examples() {
        assert_eq!(gridworld_final_state(&[1, 1, 1, 1, -1], 3).unwrap().state, 2);
        assert_eq!(gridworld_final_state(&[-1; 10], 3).unwrap().state, 0);
        assert_eq!(gridworld_final_state(&[], 3).unwrap().state, 0);
    }

    #[test]
    fn reference_matches_oracle_exhaustively() {
        for s in 1..=3 {
            for t in 1..=7 {
                for code in 0..3usize.pow(t as u32) {
                    let moves: Vec<i8> = (0..t).map(|i| (code / 3usize.pow(i as u32) % 3) as i8 - 1).collect();
                    assert_eq!(gridworld_trajectory(&moves, s).unwrap(), oracle(&moves, s), "{moves:?}");
                }
            }
        }
    }

    #[test]
    fn t_final_sits_on_a_wall() {
        let s = 2;
        for code in 0..3usize.pow(6) {
            let moves: Vec<i8> = (0..6).map(|i| (code / 3usize.pow(i) % 3) as i8 - 1).collect();
            let tr = gridworld_final_state(&moves, s).unwrap();
            let mut padded = vec![-1i8; s + 1];
            padded.extend(&moves);
            assert_eq!(oracle(&padded, s)[tr.t_final - 1], tr.boundary);
        }
    }

    #[test]
    fn net_two_layers() {
        let (net, r) = compile_gridworld(3, 10).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(net.layers[1].attn.heads.len(), 7);
    }

    #[test]
    fn net_exhaustive_s2() {
        let (s, t) = (2, 6);
        let (net, _) = compile_gridworld(s, t).unwrap();
        for code in 0..3usize.pow(t as u32) {
            let x: Vec<usize> = (0..t).map(|i| code / 3usize.pow(i as u32) % 3).collect();
            assert_eq!(net.evaluate(&x).unwrap(), oracle(&gridworld_moves(&x), s), "{x:?}");
        }
    }

    #[test]
    fn net_pm1_s3_t10() {
        let (net, _) = compile_gridworld(3, 10).unwrap();
        for code in 0..1024usize {
            let x: Vec<usize> = (0..10).map(|i| 2 * (code >> i & 1)).collect();
            assert_eq!(net.evaluate(&x).unwrap(), oracle(&gridworld_moves(&x), 3), "{x:?}");
        }
    }

    #[test]
    fn net_long_walks_s8() {
        let (s, t) = (8, 64);
        let (net, r) = compile_gridworld(s, t).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..50 {
            let x: Vec<usize> = (0..t)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 33) as usize % 3
                })
                .collect();
            assert_eq!(net.evaluate(&x).unwrap(), oracle(&gridworld_moves(&x), s), "{x:?}");
        }
    }
}
