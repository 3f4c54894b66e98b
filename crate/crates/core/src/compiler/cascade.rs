//! Cascades of permutation-reset components with wiring layers in between.

use super::assemble::{lower_all, Branch, LayerSpec};
use super::perm_reset::{ramp_positions, Component, Shared};
use super::report::CompileReport;
use crate::algebra::CascadeSpec;
use crate::error::{input, Error, Result};
use crate::tkernel::{build_interp_mlp_nd, rotation, Decoder, Head, SparseMat, TransformerNet};
use std::f64::consts::PI;

const CS: usize = 4;
const SN: usize = 5;
const SIG: usize = 6;
const SHARED: Shared = Shared { bot: 0, pos: 1, mr: 2, mc: 3 };

/// Head copying `from[j]` at position `t − 1` into `to[j]` (the padding row
/// copies itself). Positions sit on a circle of period `period`.
fn shift_head(d: usize, period: usize, beta: f64, from: &[usize], to: &[usize]) -> Head {
    let k = from.len().max(2);
    let s = beta.sqrt();
    let rot = rotation(-2.0 * PI / period as f64);
    let mut wq = SparseMat::zeros(d, k);
    let mut wk = SparseMat::zeros(d, k);
    for (i, &pi) in [CS, SN].iter().enumerate() {
        for j in 0..2 {
            wq.push(pi, j, s * rot[i][j]);
        }
        wk.push(pi, i, s);
    }
    let mut wv = SparseMat::zeros(d, k);
    let mut wc = SparseMat::zeros(k, d);
    for (j, (&f, &t)) in from.iter().zip(to).enumerate() {
        wv.push(f, j, 1.0);
        wc.push(j, t, 1.0);
    }
    Head { wq, wk, wv, wc }
}

/// Compiles a cascade; the output at `t` is `readout(q^{(1)}_t, …, q^{(n)}_t)`.
pub fn compile_cascade(spec: &CascadeSpec, q0: &[usize], t_max: usize) -> Result<(TransformerNet, CompileReport)> {
    if t_max < 1 {
        return input("T must be at least 1");
    }
    spec.validate()?;
    if q0.len() != spec.levels() {
        return input(format!("q0 tuple has arity {}, cascade has {} levels", q0.len(), spec.levels()));
    }
    let comps: Vec<Component> = spec
        .components
        .iter()
        .zip(q0)
        .enumerate()
        .map(|(i, (c, &q))| Component::build(c, q, t_max).map_err(|e| tag(i, e)))
        .collect::<Result<_>>()?;
    let levels = comps.len();
    let mut bases = Vec::with_capacity(levels);
    let mut d = SIG + 1;
    for c in &comps {
        bases.push(d);
        d += c.block_size();
    }
    let prev0 = d;
    d += levels - 1;
    let read = d;
    d += 1;

    let reachable = spec.reachable(q0)?;
    let outs: Vec<usize> = comps.iter().zip(&bases).map(|(c, &b)| c.out(b)).collect();
    let period = 2 * (t_max + 1);
    let q_max = comps.iter().map(|c| c.states).max().unwrap() as f64;
    let beta = (16.0 * (t_max + 1) as f64 * q_max).ln() / (1.0 - (2.0 * PI / period as f64).cos());

    let mut layers = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if i > 0 {
            let prev: Vec<usize> = (0..i).map(|j| prev0 + j).collect();
            let head = shift_head(d, period, beta, &outs[..i], &prev);
            let mut keys: Vec<Vec<usize>> = reachable.iter().map(|t| t[..i].to_vec()).collect();
            keys.sort();
            keys.dedup();
            let mut table = Vec::new();
            let tuple_key = |t: &[usize], s: usize| -> Vec<f64> {
                t.iter().map(|&q| q as f64).chain([s as f64]).collect()
            };
            table.push((tuple_key(&q0[..i], 0), c.pad()));
            for t in &keys {
                for s in 0..spec.alphabet().len() {
                    let sym = spec.dep_symbol(i, t, s).map_err(|e| tag(i, e))?;
                    table.push((tuple_key(t, s + 1), c.token(sym)));
                }
            }
            let bx = (q_max as usize).max(spec.alphabet().len()).max(c.sim.rep_size) as f64;
            let mlp = build_interp_mlp_nd(&table, 1.0, bx, bx)?;
            let mut inputs = prev.clone();
            inputs.push(SIG);
            layers.push(LayerSpec {
                heads: vec![head],
                attn_writes: prev,
                branches: vec![Branch::over(&mlp, d, &inputs, c.input_dims(SHARED, bases[i]))],
            });
        }
        layers.extend(c.layers(d, SHARED, bases[i]).map_err(|e| tag(i, e))?);
    }
    let table: Vec<(Vec<f64>, Vec<f64>)> = reachable
        .iter()
        .map(|t| Ok((t.iter().map(|&q| q as f64).collect(), vec![spec.read(t)? as f64])))
        .collect::<Result<_>>()?;
    let num_out = table.iter().map(|e| e.1[0] as usize).max().unwrap() + 1;
    let mlp = build_interp_mlp_nd(&table, 1.0, q_max, num_out as f64)?;
    layers.push(LayerSpec { heads: vec![], attn_writes: vec![], branches: vec![Branch::over(&mlp, d, &outs, vec![read])] });

    let alphabet = spec.alphabet().to_vec();
    let mut enc = SparseMat::zeros(alphabet.len(), d);
    let first = &comps[0];
    for s in 0..alphabet.len() {
        enc.push(s, SIG, (s + 1) as f64);
        for (&k, v) in first.input_dims(SHARED, bases[0]).iter().zip(first.token(s)) {
            enc.push(s, k, v);
        }
    }
    let mut pad = SparseMat::zeros(1, d);
    pad.push(0, SHARED.bot, 1.0);
    for (&k, v) in first.input_dims(SHARED, bases[0]).iter().zip(first.pad()) {
        pad.push(0, k, v);
    }
    let mut pos = SparseMat::zeros(t_max + 1, d);
    ramp_positions(&mut pos, SHARED, t_max);
    for t in 0..=t_max {
        let a = 2.0 * PI * t as f64 / period as f64;
        pos.push(t, CS, a.cos());
        pos.push(t, SN, a.sin());
    }
    let net = TransformerNet::assemble(
        "cascade",
        t_max,
        alphabet,
        enc,
        pad,
        pos,
        lower_all(&layers, d)?,
        Decoder::RoundCoord { dim: read, offset: 0.0, num_states: num_out },
    )?;
    let m = net.metrics.clone();
    let expected: usize = comps.iter().map(|c| c.depth()).sum::<usize>() + levels;
    let mut r = CompileReport::new("cascade", t_max, m.clone());
    r.equals("depth", m.depth as f64, expected as f64);
    for (i, c) in comps.iter().enumerate() {
        for chk in c.report.checks.iter().filter(|c| !c.pass) {
            let mut chk = chk.clone();
            chk.name = format!("component {i}: {}", chk.name);
            r.checks.push(chk);
        }
    }
    Ok((net, r))
}

fn tag(i: usize, e: Error) -> Error {
    match e {
        Error::Input(m) => Error::Input(format!("component {i}: {m}")),
        Error::Refusal(m) => Error::Refusal(format!("component {i}: {m}")),
        Error::Unsupported(m) => Error::Unsupported(format!("component {i}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cascade::shipped;
    use crate::algebra::cascade_evaluate;
    use crate::compiler::compile_permutation_reset;

    fn exhaustive(spec: &CascadeSpec, q0: &[usize], t: usize) {
        let (net, r) = compile_cascade(spec, q0, t).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        let k = spec.alphabet().len();
        for code in 0..k.pow(t as u32) {
            let x: Vec<usize> = (0..t).map(|i| code / k.pow(i as u32) % k).collect();
            assert_eq!(net.evaluate(&x).unwrap(), cascade_evaluate(spec, q0, &x).unwrap().outputs, "{x:?}");
        }
    }

    #[test]
    fn shipped_cascades_exhaustive() {
        for c in shipped::all() {
            exhaustive(&c.spec, &c.q0_tuple, 5);
        }
    }

    #[test]
    fn d8_depth() {
        let c = shipped::dihedral(4);
        let (net, _) = compile_cascade(&c.spec, &c.q0_tuple, 8).unwrap();
        assert_eq!(net.depth(), 6);
    }

    #[test]
    fn single_component_matches_perm_reset() {
        let a = crate::automaton::Semiautomaton::memory(2).unwrap();
        let spec = CascadeSpec {
            components: vec![a.clone()],
            deps: vec![],
            readout: (0..2).map(|q| (vec![q], q)).collect(),
        };
        let (net, _) = compile_cascade(&spec, &[1], 6).unwrap();
        let (direct, _) = compile_permutation_reset(&a, 1, 6).unwrap();
        for code in 0..3usize.pow(6) {
            let x: Vec<usize> = (0..6).map(|i| code / 3usize.pow(i) % 3).collect();
            assert_eq!(net.evaluate(&x).unwrap(), direct.evaluate(&x).unwrap());
        }
    }
}
