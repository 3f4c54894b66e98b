use super::sparse::{Csr, SparseMat};
use crate::error::{input, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One affine map `x ↦ x·W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub w: SparseMat,
    pub b: Vec<f64>,
}

impl Affine {
    pub fn new(w: SparseMat, b: Vec<f64>) -> Self {
        assert_eq!(w.cols, b.len(), "bias length must match output width");
        Affine { w, b }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Affine { w: SparseMat::zeros(input, output), b: vec![0.0; output] }
    }

    pub fn max_abs(&self) -> f64 {
        self.b.iter().fold(self.w.max_abs(), |m, v| m.max(v.abs()))
    }
}

/// ReLU network: affine layers with ReLU between them and a linear output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Affine>,
}

impl Mlp {
    pub fn new(layers: Vec<Affine>) -> Result<Self> {
        for w in layers.windows(2) {
            if w[0].w.cols != w[1].w.rows {
                return input(format!("layer widths {} and {} do not chain", w[0].w.cols, w[1].w.rows));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.w.rows)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w.cols)
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers.iter().take(self.layers.len().saturating_sub(1)).map(|l| l.w.cols).collect()
    }

    pub fn width(&self) -> usize {
        self.hidden_widths().into_iter().max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, l| m.max(l.max_abs()))
    }

    /// Moves the input rows and output columns into larger index spaces.
    pub fn relocate(&self, d_in: usize, in_map: &[usize], d_out: usize, out_map: &[usize]) -> Mlp {
        let n = self.layers.len();
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let rows = if i == 0 { d_in } else { l.w.rows };
                let cols = if i + 1 == n { d_out } else { l.w.cols };
                let w = l.w.relocate(
                    rows,
                    cols,
                    &|r| if i == 0 { in_map[r] } else { r },
                    &|c| if i + 1 == n { out_map[c] } else { c },
                );
                let b = if i + 1 == n {
                    let mut b = vec![0.0; d_out];
                    for (c, &v) in l.b.iter().enumerate() {
                        b[out_map[c]] += v;
                    }
                    b
                } else {
                    l.b.clone()
                };
                Affine { w, b }
            })
            .collect();
        Mlp { layers }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        MlpPlan::new(self).apply(x)
    }
}

/// Position-wise MLP plus a per-dimension residual mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpBlock {
    pub mlp: Mlp,
    pub residual: Vec<bool>,
}

impl MlpBlock {
    pub fn identity(d: usize) -> Self {
        MlpBlock { mlp: Mlp::default(), residual: vec![true; d] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub wq: SparseMat,
    pub wk: SparseMat,
    pub wv: SparseMat,
    pub wc: SparseMat,
}

impl Head {
    pub fn head_dim(&self) -> usize {
        self.wq.cols
    }

    pub fn max_abs(&self) -> f64 {
        [&self.wq, &self.wk, &self.wv, &self.wc].iter().fold(0.0, |m, w| m.max(w.max_abs()))
    }
}

/// Multi-head causal self-attention; the output is the sum of the heads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionBlock {
    pub heads: Vec<Head>,
    pub residual: Vec<bool>,
}

impl AttentionBlock {
    pub fn identity(d: usize) -> Self {
        AttentionBlock { heads: vec![], residual: vec![true; d] }
    }

    pub fn width(&self) -> usize {
        self.heads.iter().map(|h| h.head_dim()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.heads.iter().fold(0.0, |m, h| m.max(h.max_abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub attn: AttentionBlock,
    pub mlp: MlpBlock,
}

pub(crate) struct MlpPlan {
    layers: Vec<(Csr, Vec<f64>)>,
    out_dim: usize,
}

impl MlpPlan {
    pub(crate) fn new(m: &Mlp) -> Self {
        MlpPlan {
            layers: m.layers.iter().map(|l| (l.w.to_csr(), l.b.clone())).collect(),
            out_dim: m.out_dim(),
        }
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        if self.layers.is_empty() {
            return vec![];
        }
        let mut cur = x.to_vec();
        let n = self.layers.len();
        for (i, (w, b)) in self.layers.iter().enumerate() {
            let mut next = b.clone();
            w.accumulate_vecmat(&cur, &mut next);
            if i + 1 < n {
                for v in &mut next {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            cur = next;
        }
        debug_assert_eq!(cur.len(), self.out_dim);
        cur
    }
}

pub(crate) struct HeadPlan {
    qk: Csr,
    ov: Csr,
    v_dims: Vec<usize>,
}

pub(crate) struct AttnPlan {
    heads: Vec<HeadPlan>,
}

impl AttnPlan {
    pub(crate) fn new(a: &AttentionBlock) -> Self {
        let heads = a
            .heads
            .iter()
            .map(|h| {
                let qk = h.wq.matmul(&h.wk.transpose()).to_csr();
                let ov = h.wv.matmul(&h.wc).to_csr();
                let v_dims = (0..ov.rows).filter(|&r| !ov.row_is_empty(r)).collect();
                HeadPlan { qk, ov, v_dims }
            })
            .collect();
        AttnPlan { heads }
    }

    /// Attention output (without residual) at position `t` over rows `0..=t`.
    pub(crate) fn output_at(&self, x: &[f64], d: usize, t: usize, out: &mut [f64]) {
        let row = |j: usize| &x[j * d..(j + 1) * d];
        let mut scores = vec![0.0; t + 1];
        for h in &self.heads {
            let mut q = vec![0.0; d];
            h.qk.accumulate_vecmat(row(t), &mut q);
            let nz: Vec<(usize, f64)> = q.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
            let mut best = f64::NEG_INFINITY;
            for (j, s) in scores.iter_mut().enumerate() {
                let xj = row(j);
                *s = nz.iter().map(|&(i, v)| v * xj[i]).sum();
                best = best.max(*s);
            }
            let mut z = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - best).exp();
                z += *s;
            }
            let mut mix = vec![0.0; d];
            for (j, &w) in scores.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let a = w / z;
                let xj = row(j);
                for &i in &h.v_dims {
                    mix[i] += a * xj[i];
                }
            }
            h.ov.accumulate_vecmat(&mix, out);
        }
    }
}

fn check_rows(x: &[Vec<f64>], d: usize) -> Result<()> {
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return input(format!("row has width {}, expected {d}", r.len()));
    }
    Ok(())
}

/// Row-wise causally masked softmax attention with per-dimension residual.
pub fn causal_attention(x: &[Vec<f64>], block: &AttentionBlock) -> Result<Vec<Vec<f64>>> {
    let d = block.residual.len();
    check_rows(x, d)?;
    for h in &block.heads {
        if h.wq.rows != d || h.wk.rows != d || h.wv.rows != d || h.wc.cols != d {
            return input("head shapes do not match the embedding dimension");
        }
        if h.wq.cols != h.wk.cols || h.wk.cols != h.wv.cols || h.wv.cols != h.wc.rows {
            return input("head inner dimensions disagree");
        }
    }
    let plan = AttnPlan::new(block);
    let flat: Vec<f64> = x.iter().flatten().copied().collect();
    Ok((0..x.len())
        .into_par_iter()
        .map(|t| {
            let mut out = vec![0.0; d];
            plan.output_at(&flat, d, t, &mut out);
            for i in 0..d {
                if block.residual[i] {
                    out[i] += x[t][i];
                }
            }
            out
        })
        .collect())
}

/// Applies the block's MLP to every row and adds the residual.
pub fn mlp_apply(x: &[Vec<f64>], block: &MlpBlock) -> Result<Vec<Vec<f64>>> {
    let d = block.residual.len();
    check_rows(x, d)?;
    if !block.mlp.layers.is_empty() && (block.mlp.in_dim() != d || block.mlp.out_dim() != d) {
        return input("MLP input/output width must equal the embedding dimension");
    }
    let plan = MlpPlan::new(&block.mlp);
    Ok(x
        .par_iter()
        .map(|r| {
            let mut out = plan.apply(r);
            out.resize(d, 0.0);
            for i in 0..d {
                if block.residual[i] {
                    out[i] += r[i];
                }
            }
            out
        })
        .collect())
}

/// Plain softmax over a score vector.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
