use super::assemble::{lower_all, Branch, LayerSpec};
use super::report::{norm, CompileReport};
use crate::automaton::Semiautomaton;
use crate::error::{input, Result};
use crate::tkernel::{build_interp_mlp_1d, Decoder, Head, SparseMat, TransformerNet};

const MV: usize = 0;
const MB: usize = 1;
const MR: usize = 2;
const MC: usize = 3;

/// Key scale of the "latest write" head.
pub fn memory_scale(values: usize, t_max: usize) -> f64 {
    let t = t_max as f64;
    t * (16.0 * values as f64 * t).ln()
}

/// Head selecting the latest position with `MB = 0`; the padding row counts
/// as a write of its `MV`. Scores are `c·(t/T − 2·MB)`.
pub(crate) fn latest_write_head(d: usize, mc: usize, mb: usize, mr: usize, c: f64, values: &[(usize, usize)]) -> Head {
    let k = values.len().max(2);
    let mut wq = SparseMat::zeros(d, k);
    wq.push(mc, 0, -2.0);
    wq.push(mc, 1, 1.0);
    let mut wk = SparseMat::zeros(d, k);
    wk.push(mb, 0, c);
    wk.push(mr, 1, c);
    let mut wv = SparseMat::zeros(d, k);
    let mut wc = SparseMat::zeros(k, d);
    for (i, &(from, to)) in values.iter().enumerate() {
        wv.push(from, i, 1.0);
        wc.push(i, to, 1.0);
    }
    Head { wq, wk, wv, wc }
}

/// One-layer simulator of `memory(num_states)` from `q0`.
pub fn compile_memory(num_states: usize, t_max: usize, q0: usize) -> Result<(TransformerNet, CompileReport)> {
    if num_states < 1 {
        return input("memory needs at least one state");
    }
    if t_max < 1 {
        return input("T must be at least 1");
    }
    if q0 >= num_states {
        return input(format!("q0={q0} out of range"));
    }
    let a = Semiautomaton::memory(num_states)?;
    let d = 4;
    let c = memory_scale(num_states, t_max);
    let head = latest_write_head(d, MC, MB, MR, c, &[(MV, MV)]);
    let table: Vec<(f64, Vec<f64>)> = (0..num_states).map(|v| (v as f64, vec![v as f64])).collect();
    let top = (num_states - 1) as f64;
    let mlp = build_interp_mlp_1d(&table, 0.5, top, top)?;
    let spec = LayerSpec { heads: vec![head], attn_writes: vec![MV], branches: vec![Branch::over(&mlp, d, &[MV], vec![MV])] };

    let mut enc = SparseMat::zeros(num_states + 1, d);
    enc.push(0, MB, 1.0);
    for v in 0..num_states {
        enc.push(v + 1, MV, v as f64);
    }
    let mut pad = SparseMat::zeros(1, d);
    pad.push(0, MV, q0 as f64);
    let mut pos = SparseMat::zeros(t_max + 1, d);
    for t in 0..=t_max {
        pos.push(t, MR, t as f64 / t_max as f64);
        pos.push(t, MC, 1.0);
    }
    let net = TransformerNet::assemble(
        "memory",
        t_max,
        a.alphabet().to_vec(),
        enc,
        pad,
        pos,
        lower_all(&[spec], d)?,
        Decoder::RoundCoord { dim: MV, offset: 0.0, num_states },
    )?;
    let m = net.metrics.clone();
    let t = t_max as f64;
    let q = num_states as f64;
    let mut r = CompileReport::new("memory", t_max, m.clone());
    r.equals("depth", m.depth as f64, 1.0)
        .equals("embed_dim", m.embed_dim as f64, 4.0)
        .equals("heads", m.max_heads as f64, 1.0)
        .at_most("mlp_width", m.mlp_width as f64, 4.0 * q)
        .at_most("norm", norm(&m), 2.0 * t * (q * t).ln());
    if q * t < 16.0 {
        r.note("|Q|·T < 16: the key scale T·log(16|Q|T) exceeds 2T·log(|Q|T)");
    }
    Ok((net, r))
}
