//! Relocatable layer descriptions and their lowering to kernel layers.

use crate::error::{input, Result};
use crate::tkernel::{Affine, AttentionBlock, Head, Layer, Mlp, MlpBlock, SparseMat};

/// An MLP reading the full stream and writing `out_dims` (no residual there).
#[derive(Clone, Debug)]
pub struct Branch {
    pub mlp: Mlp,
    pub out_dims: Vec<usize>,
}

impl Branch {
    /// Wraps an MLP over a few local inputs into a branch over a `d`-wide stream.
    pub fn over(mlp: &Mlp, d: usize, inputs: &[usize], out_dims: Vec<usize>) -> Branch {
        let m = mlp.relocate(d, inputs, out_dims.len(), &(0..out_dims.len()).collect::<Vec<_>>());
        Branch { mlp: m, out_dims }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LayerSpec {
    pub heads: Vec<Head>,
    /// Dims overwritten by the attention sublayer.
    pub attn_writes: Vec<usize>,
    pub branches: Vec<Branch>,
}

fn relocate_head(h: &Head, d: usize, map: &dyn Fn(usize) -> usize) -> Head {
    let id = |c: usize| c;
    Head {
        wq: h.wq.relocate(d, h.wq.cols, map, &id),
        wk: h.wk.relocate(d, h.wk.cols, map, &id),
        wv: h.wv.relocate(d, h.wv.cols, map, &id),
        wc: h.wc.relocate(h.wc.rows, d, &id, map),
    }
}

impl LayerSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn relocate(&self, d: usize, map: &dyn Fn(usize) -> usize) -> LayerSpec {
        LayerSpec {
            heads: self.heads.iter().map(|h| relocate_head(h, d, map)).collect(),
            attn_writes: self.attn_writes.iter().map(|&i| map(i)).collect(),
            branches: self
                .branches
                .iter()
                .map(|b| {
                    let in_map: Vec<usize> = (0..b.mlp.in_dim()).map(map).collect();
                    let k = b.out_dims.len();
                    let out_map: Vec<usize> = (0..k).collect();
                    Branch { mlp: b.mlp.relocate(d, &in_map, k, &out_map), out_dims: b.out_dims.iter().map(|&i| map(i)).collect() }
                })
                .collect(),
        }
    }

    /// Runs two layer specs side by side; their written dims must be disjoint.
    pub fn merge(mut self, other: LayerSpec) -> LayerSpec {
        self.heads.extend(other.heads);
        self.attn_writes.extend(other.attn_writes);
        self.branches.extend(other.branches);
        self
    }

    pub fn lower(&self, d: usize) -> Result<Layer> {
        let mut attn_res = vec![true; d];
        for &i in &self.attn_writes {
            if !attn_res[i] {
                return input(format!("dim {i} written twice by attention"));
            }
            attn_res[i] = false;
        }
        let mut mlp_res = vec![true; d];
        for b in &self.branches {
            if b.mlp.in_dim() != d || b.mlp.out_dim() != b.out_dims.len() {
                return input("branch MLP shape does not match the stream");
            }
            for &i in &b.out_dims {
                if !mlp_res[i] {
                    return input(format!("dim {i} written twice by MLP branches"));
                }
                mlp_res[i] = false;
            }
        }
        Ok(Layer {
            attn: AttentionBlock { heads: self.heads.clone(), residual: attn_res },
            mlp: MlpBlock { mlp: stack_branches(&self.branches, d), residual: mlp_res },
        })
    }
}

/// Extends a branch to `depth` affine layers with ReLU pass-through.
fn deepen(m: &Mlp, depth: usize) -> Mlp {
    let n = m.layers.len();
    if n >= depth {
        return m.clone();
    }
    let last = &m.layers[n - 1];
    let k = last.w.cols;
    let mut layers: Vec<Affine> = m.layers[..n - 1].to_vec();
    let mut w = SparseMat::zeros(last.w.rows, 2 * k);
    for &(r, c, v) in &last.w.entries {
        w.push(r, c, v);
        w.push(r, k + c, -v);
    }
    let mut b = last.b.clone();
    b.extend(last.b.iter().map(|v| -v));
    layers.push(Affine::new(w, b));
    for _ in n..depth - 1 {
        layers.push(Affine::new(SparseMat::identity(2 * k), vec![0.0; 2 * k]));
    }
    let mut out = SparseMat::zeros(2 * k, k);
    for c in 0..k {
        out.push(c, c, 1.0);
        out.push(k + c, c, -1.0);
    }
    layers.push(Affine::new(out, vec![0.0; k]));
    Mlp { layers }
}

/// Block-diagonal stack of branches as one `d → d` MLP.
fn stack_branches(branches: &[Branch], d: usize) -> Mlp {
    let branches: Vec<&Branch> = branches.iter().filter(|b| !b.mlp.layers.is_empty()).collect();
    if branches.is_empty() {
        return Mlp::default();
    }
    let depth = branches.iter().map(|b| b.mlp.layers.len()).max().unwrap();
    let deep: Vec<(Mlp, &Vec<usize>)> = branches.iter().map(|b| (deepen(&b.mlp, depth), &b.out_dims)).collect();
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let rows = if l == 0 { d } else { deep.iter().map(|(m, _)| m.layers[l].w.rows).sum() };
        let cols = if l + 1 == depth { d } else { deep.iter().map(|(m, _)| m.layers[l].w.cols).sum() };
        let mut w = SparseMat::zeros(rows, cols);
        let mut b = vec![0.0; cols];
        let (mut r0, mut c0) = (0, 0);
        for (m, outs) in &deep {
            let a = &m.layers[l];
            for &(r, c, v) in &a.w.entries {
                let r = if l == 0 { r } else { r0 + r };
                let c = if l + 1 == depth { outs[c] } else { c0 + c };
                w.push(r, c, v);
            }
            for (c, &v) in a.b.iter().enumerate() {
                let c = if l + 1 == depth { outs[c] } else { c0 + c };
                b[c] += v;
            }
            r0 += a.w.rows;
            c0 += a.w.cols;
        }
        layers.push(Affine::new(w, b));
    }
    Mlp { layers }
}

/// Assembles the `d`-wide layers of a spec list.
pub fn lower_all(specs: &[LayerSpec], d: usize) -> Result<Vec<Layer>> {
    specs.iter().map(|s| s.lower(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tkernel::blocks::mlp_apply;

    fn affine(rows: &[Vec<f64>], b: Vec<f64>) -> Affine {
        Affine::new(SparseMat::from_dense(rows), b)
    }

    #[test]
    fn deepening_preserves_values() {
        let m = Mlp::new(vec![affine(&[vec![2.0, -1.0]], vec![0.5, 3.0])]).unwrap();
        let deep = deepen(&m, 3);
        assert_eq!(deep.layers.len(), 3);
        for x in [-4.0, 0.0, 1.5] {
            assert_eq!(m.apply(&[x]), deep.apply(&[x]));
        }
    }

    #[test]
    fn branches_of_different_depth() {
        let d = 3;
        let shallow = Branch::over(&Mlp::new(vec![affine(&[vec![-1.0]], vec![1.0])]).unwrap(), d, &[0], vec![1]);
        let two = Mlp::new(vec![affine(&[vec![1.0]], vec![-1.0]), affine(&[vec![2.0]], vec![0.0])]).unwrap();
        let deep = Branch::over(&two, d, &[1], vec![2]);
        let spec = LayerSpec { heads: vec![], attn_writes: vec![], branches: vec![shallow, deep] };
        let layer = spec.lower(d).unwrap();
        let y = mlp_apply(&[vec![4.0, 3.0, 9.0]], &layer.mlp).unwrap();
        assert_eq!(y[0], vec![4.0, -3.0, 4.0]);
    }

    #[test]
    fn overlapping_writes_rejected() {
        let b = Branch::over(&Mlp::new(vec![affine(&[vec![1.0]], vec![0.0])]).unwrap(), 2, &[0], vec![1]);
        let spec = LayerSpec { heads: vec![], attn_writes: vec![], branches: vec![b.clone(), b] };
        assert!(spec.lower(2).is_err());
    }

    #[test]
    fn relocation_moves_outputs() {
        let b = Branch::over(&Mlp::new(vec![affine(&[vec![1.0]], vec![1.0])]).unwrap(), 2, &[0], vec![1]);
        let spec = LayerSpec { heads: vec![], attn_writes: vec![], branches: vec![b] }.relocate(4, &|i| i + 2);
        let layer = spec.lower(4).unwrap();
        let y = mlp_apply(&[vec![7.0, 7.0, 5.0, 0.0]], &layer.mlp).unwrap();
        assert_eq!(y[0], vec![7.0, 7.0, 5.0, 6.0]);
    }
}
