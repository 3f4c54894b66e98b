use super::blocks::{AttnPlan, Layer, MlpPlan};
use super::sparse::SparseMat;
use crate::error::{input, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

pub const DECODE_TOLERANCE: f64 = 0.25;

/// Maps a final activation row to a state index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Decoder {
    /// `round(x[dim] - offset)`, required to lie in `0..num_states`.
    RoundCoord { dim: usize, offset: f64, num_states: usize },
    /// Rounds `x[dims]` and looks the integer tuple up in `table`.
    RoundLookup { dims: Vec<usize>, table: Vec<(Vec<i64>, usize)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub depth: usize,
    pub embed_dim: usize,
    pub max_heads: usize,
    pub max_head_dim: usize,
    pub attn_width: usize,
    pub mlp_width: usize,
    pub mlp_depth: usize,
    pub max_abs_weight: f64,
    pub max_abs_embedding: f64,
}

/// A transformer with fixed weights simulating a semiautomaton for inputs of
/// length at most `t_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformerNet {
    pub construction: String,
    pub t_max: usize,
    pub d: usize,
    pub alphabet: Vec<String>,
    pub token_encoder: SparseMat,
    pub padding: SparseMat,
    pub positional: SparseMat,
    pub layers: Vec<Layer>,
    pub decoder: Decoder,
    pub metrics: Metrics,
}

impl TransformerNet {
    pub fn assemble(
        construction: impl Into<String>,
        t_max: usize,
        alphabet: Vec<String>,
        token_encoder: SparseMat,
        padding: SparseMat,
        positional: SparseMat,
        layers: Vec<Layer>,
        decoder: Decoder,
    ) -> Result<Self> {
        let d = token_encoder.cols;
        let mut net = TransformerNet {
            construction: construction.into(),
            t_max,
            d,
            alphabet,
            token_encoder,
            padding,
            positional,
            layers,
            decoder,
            metrics: Metrics {
                depth: 0,
                embed_dim: d,
                max_heads: 0,
                max_head_dim: 0,
                attn_width: 0,
                mlp_width: 0,
                mlp_depth: 0,
                max_abs_weight: 0.0,
                max_abs_embedding: 0.0,
            },
        };
        net.validate_shapes()?;
        net.metrics = net.compute_metrics();
        Ok(net)
    }

    pub fn padding_len(&self) -> usize {
        self.padding.rows
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn validate_shapes(&self) -> Result<()> {
        let d = self.d;
        if self.token_encoder.rows != self.alphabet.len() || self.token_encoder.cols != d {
            return input("token encoder shape mismatch");
        }
        if self.padding.cols != d || self.positional.cols != d {
            return input("padding/positional width mismatch");
        }
        if self.positional.rows < self.padding.rows + self.t_max {
            return input("positional table shorter than padding + T");
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.attn.residual.len() != d || l.mlp.residual.len() != d {
                return input(format!("layer {i} residual mask width mismatch"));
            }
            for h in &l.attn.heads {
                if h.wq.rows != d || h.wk.rows != d || h.wv.rows != d || h.wc.cols != d {
                    return input(format!("layer {i} head shape mismatch"));
                }
            }
            let m = &l.mlp.mlp;
            if !m.layers.is_empty() && (m.in_dim() != d || m.out_dim() != d) {
                return input(format!("layer {i} MLP width mismatch"));
            }
        }
        Ok(())
    }

    pub fn compute_metrics(&self) -> Metrics {
        let max_abs_embedding = [&self.token_encoder, &self.padding, &self.positional]
            .iter()
            .fold(0.0, |m: f64, w| m.max(w.max_abs()));
        Metrics {
            depth: self.layers.len(),
            embed_dim: self.d,
            max_heads: self.layers.iter().map(|l| l.attn.heads.len()).max().unwrap_or(0),
            max_head_dim: self
                .layers
                .iter()
                .flat_map(|l| l.attn.heads.iter().map(|h| h.head_dim()))
                .max()
                .unwrap_or(0),
            attn_width: self.layers.iter().map(|l| l.attn.width()).max().unwrap_or(0),
            mlp_width: self.layers.iter().map(|l| l.mlp.mlp.width()).max().unwrap_or(0),
            mlp_depth: self.layers.iter().map(|l| l.mlp.mlp.layers.len()).max().unwrap_or(0),
            max_abs_weight: self
                .layers
                .iter()
                .fold(0.0, |m: f64, l| m.max(l.attn.max_abs()).max(l.mlp.mlp.max_abs())),
            max_abs_embedding,
        }
    }

    pub fn refresh_metrics(&mut self) {
        self.metrics = self.compute_metrics();
    }

    pub fn plan(&self) -> NetPlan<'_> {
        NetPlan {
            net: self,
            layers: self.layers.iter().map(|l| (AttnPlan::new(&l.attn), MlpPlan::new(&l.mlp.mlp))).collect(),
            encoder: (0..self.alphabet.len()).map(|s| self.token_encoder.row_dense(s)).collect(),
            pad_rows: (0..self.padding.rows).map(|i| self.padding.row_dense(i)).collect(),
            pos_rows: (0..self.positional.rows).map(|i| self.positional.row_dense(i)).collect(),
            lookup: match &self.decoder {
                Decoder::RoundLookup { table, .. } => table.iter().cloned().collect(),
                _ => HashMap::new(),
            },
        }
    }

    pub fn evaluate(&self, inputs: &[usize]) -> Result<Vec<usize>> {
        self.plan().evaluate(inputs)
    }

    pub fn evaluate_labels<S: AsRef<str>>(&self, inputs: &[S]) -> Result<Vec<usize>> {
        let idx = inputs
            .iter()
            .map(|s| {
                self.alphabet
                    .iter()
                    .position(|a| a == s.as_ref())
                    .ok_or_else(|| Error::Input(format!("unknown symbol {:?}", s.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        self.evaluate(&idx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("net serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let net: TransformerNet = serde_json::from_str(s)?;
        net.validate_shapes()?;
        if net.compute_metrics() != net.metrics {
            return input("stored metrics do not match the weights");
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Evaluation-ready form of a net with row-compressed weights.
pub struct NetPlan<'a> {
    net: &'a TransformerNet,
    layers: Vec<(AttnPlan, MlpPlan)>,
    encoder: Vec<Vec<f64>>,
    pad_rows: Vec<Vec<f64>>,
    pos_rows: Vec<Vec<f64>>,
    lookup: HashMap<Vec<i64>, usize>,
}

/// Decoded states plus the smallest distance to a rounding boundary seen.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub states: Vec<usize>,
    pub min_margin: f64,
}

impl NetPlan<'_> {
    pub fn embed(&self, inputs: &[usize]) -> Result<Vec<f64>> {
        let net = self.net;
        if inputs.len() > net.t_max {
            return input(format!("input length {} exceeds compiled T = {}", inputs.len(), net.t_max));
        }
        let p = net.padding_len();
        let d = net.d;
        let mut x = vec![0.0; (p + inputs.len()) * d];
        for i in 0..p + inputs.len() {
            let src = if i < p {
                &self.pad_rows[i]
            } else {
                let s = inputs[i - p];
                if s >= self.encoder.len() {
                    return input(format!("symbol index {s} out of range"));
                }
                &self.encoder[s]
            };
            let row = &mut x[i * d..(i + 1) * d];
            for k in 0..d {
                row[k] = src[k] + self.pos_rows[i][k];
            }
        }
        Ok(x)
    }

    /// Final activations for every position including the padding prefix.
    pub fn forward(&self, inputs: &[usize]) -> Result<Vec<f64>> {
        self.forward_layers(inputs, self.layers.len())
    }

    pub fn forward_layers(&self, inputs: &[usize], upto: usize) -> Result<Vec<f64>> {
        let mut x = self.embed(inputs)?;
        let d = self.net.d;
        let n = x.len() / d;
        for (li, (attn, mlp)) in self.layers.iter().enumerate().take(upto) {
            let layer = &self.net.layers[li];
            let mut y = vec![0.0; n * d];
            y.par_chunks_mut(d).enumerate().with_min_len(4).for_each(|(t, out)| {
                attn.output_at(&x, d, t, out);
                for k in 0..d {
                    if layer.attn.residual[k] {
                        out[k] += x[t * d + k];
                    }
                }
            });
            let has_mlp = !layer.mlp.mlp.layers.is_empty();
            x.par_chunks_mut(d).enumerate().with_min_len(4).for_each(|(t, out)| {
                let row = &y[t * d..(t + 1) * d];
                let m = if has_mlp { mlp.apply(row) } else { vec![0.0; d] };
                for k in 0..d {
                    out[k] = m[k] + if layer.mlp.residual[k] { row[k] } else { 0.0 };
                }
            });
        }
        Ok(x)
    }

    pub fn decode_row(&self, row: &[f64], position: usize) -> Result<(usize, f64)> {
        let err = |msg: String| Error::Decode { msg, position, activation: row.to_vec() };
        let round = |v: f64| -> Result<(i64, f64)> {
            let r = v.round();
            let dist = (v - r).abs();
            if !(dist <= DECODE_TOLERANCE) {
                return Err(err(format!("value {v} is not within {DECODE_TOLERANCE} of an integer")));
            }
            Ok((r as i64, 0.5 - dist))
        };
        match &self.net.decoder {
            Decoder::RoundCoord { dim, offset, num_states } => {
                let (r, m) = round(row[*dim] - offset)?;
                if r < 0 || r as usize >= *num_states {
                    return Err(err(format!("decoded state {r} out of range")));
                }
                Ok((r as usize, m))
            }
            Decoder::RoundLookup { dims, .. } => {
                let mut key = Vec::with_capacity(dims.len());
                let mut margin = 0.5f64;
                for &k in dims {
                    let (r, m) = round(row[k])?;
                    key.push(r);
                    margin = margin.min(m);
                }
                let q = self.lookup.get(&key).copied().ok_or_else(|| err(format!("no state for code {key:?}")))?;
                Ok((q, margin))
            }
        }
    }

    pub fn evaluate_with_margin(&self, inputs: &[usize]) -> Result<Decoded> {
        let x = self.forward(inputs)?;
        let d = self.net.d;
        let p = self.net.padding_len();
        let mut states = Vec::with_capacity(inputs.len());
        let mut min_margin = 0.5f64;
        for t in 0..inputs.len() {
            let (q, m) = self.decode_row(&x[(p + t) * d..(p + t + 1) * d], t)?;
            states.push(q);
            min_margin = min_margin.min(m);
        }
        Ok(Decoded { states, min_margin })
    }

    pub fn evaluate(&self, inputs: &[usize]) -> Result<Vec<usize>> {
        Ok(self.evaluate_with_margin(inputs)?.states)
    }
}

pub fn net_evaluate(net: &TransformerNet, inputs: &[usize]) -> Result<Vec<usize>> {
    net.evaluate(inputs)
}
