//! Direct, semidirect and wreath products of group simulators.

use super::assemble::{Branch, LayerSpec};
use super::groupsim::GroupSim;
use super::report::{norm, CompileReport};
use crate::algebra::{validate_action, GroupTable};
use crate::error::{input, Error, Result};
use crate::tkernel::{build_interp_mlp_nd, Affine, Mlp, SparseMat};

/// Local dim `i` of a simulator placed with its private dims starting at `offset`.
fn place(offset: usize) -> impl Fn(usize) -> usize {
    move |i| if i < 2 { i } else { offset + i - 2 }
}

fn same_t(sims: &[&GroupSim]) -> Result<usize> {
    let t = sims[0].t_max;
    if sims.iter().any(|s| s.t_max != t) {
        return input("simulators were compiled for different T");
    }
    Ok(t)
}

fn to_f64(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// Runs the simulators side by side; shallower ones idle in trailing layers.
/// Element `(g_0, g_1, …)` is stored in mixed radix with `g_0` least significant.
pub fn combine_direct_product(sims: &[GroupSim]) -> Result<GroupSim> {
    if sims.is_empty() {
        return input("direct product of no simulators");
    }
    let refs: Vec<&GroupSim> = sims.iter().collect();
    let t_max = same_t(&refs)?;
    let mut offsets = Vec::with_capacity(sims.len());
    let mut dim = 2;
    for s in sims {
        offsets.push(dim);
        dim += s.dim - 2;
    }
    let depth = sims.iter().map(|s| s.depth()).max().unwrap();
    let layers = (0..depth)
        .map(|l| {
            sims.iter().zip(&offsets).fold(LayerSpec::empty(), |acc, (s, &o)| match s.layers.get(l) {
                Some(spec) => acc.merge(spec.relocate(dim, &place(o))),
                None => acc,
            })
        })
        .collect();
    let rep_dims = sims.iter().zip(&offsets).flat_map(|(s, &o)| s.rep_dims.iter().map(move |&i| place(o)(i))).collect();
    let group = sims[1..].iter().fold(sims[0].group.clone(), |g, s| GroupTable::direct_product(&g, &s.group));
    let encode = (0..group.n)
        .map(|mut x| {
            let mut e = Vec::new();
            for s in sims {
                e.extend(&s.encode[x % s.group.n]);
                x /= s.group.n;
            }
            e
        })
        .collect();
    Ok(GroupSim {
        name: sims.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join("x"),
        group,
        t_max,
        dim,
        rep_dims,
        rep_size: sims.iter().map(|s| s.rep_size).max().unwrap(),
        encode,
        layers,
    })
}

/// Layout shared by the semidirect and wreath constructions:
/// `[H layers][mix][N layers][unmix]`, with H's private dims first.
struct Stacked {
    dim: usize,
    n_rep: Vec<usize>,
    h_rep: Vec<usize>,
    layers: Vec<LayerSpec>,
}

fn stack(sim_n: &GroupSim, sim_h: &GroupSim, mix: &Mlp, unmix: &Mlp) -> Stacked {
    let h_off = 2;
    let n_off = 2 + sim_h.dim - 2;
    let dim = n_off + sim_n.dim - 2;
    let n_rep: Vec<usize> = sim_n.rep_dims.iter().map(|&i| place(n_off)(i)).collect();
    let h_rep: Vec<usize> = sim_h.rep_dims.iter().map(|&i| place(h_off)(i)).collect();
    let inputs: Vec<usize> = n_rep.iter().chain(&h_rep).copied().collect();
    let mixing = |m: &Mlp| LayerSpec { heads: vec![], attn_writes: vec![], branches: vec![Branch::over(m, dim, &inputs, n_rep.clone())] };
    let mut layers: Vec<LayerSpec> = sim_h.layers.iter().map(|l| l.relocate(dim, &place(h_off))).collect();
    layers.push(mixing(mix));
    layers.extend(sim_n.layers.iter().map(|l| l.relocate(dim, &place(n_off))));
    layers.push(mixing(unmix));
    Stacked { dim, n_rep, h_rep, layers }
}

/// `N ⋊_φ H` with `phi[h][g] = φ_h(g)`: the H prefix is computed first, the
/// N tokens are pulled back by `φ_{H_t}⁻¹`, multiplied, and pushed forward.
pub fn combine_semidirect(sim_n: &GroupSim, sim_h: &GroupSim, phi: &[Vec<usize>]) -> Result<GroupSim> {
    same_t(&[sim_n, sim_h])?;
    validate_action(&sim_n.group, &sim_h.group, phi)?;
    if sim_n.rep_dim() == 0 || sim_h.rep_dim() == 0 {
        return input("semidirect factors must be nontrivial");
    }
    let group = GroupTable::semidirect_product(&sim_n.group, &sim_h.group, phi)?;
    let (nn, nh) = (sim_n.group.n, sim_h.group.n);
    let mut phi_inv = vec![vec![0; nn]; nh];
    for h in 0..nh {
        for g in 0..nn {
            phi_inv[h][phi[h][g]] = g;
        }
    }
    let table = |f: &Vec<Vec<usize>>| -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..nh)
            .flat_map(|h| (0..nn).map(move |g| (g, h)))
            .map(|(g, h)| {
                let mut key = to_f64(&sim_n.encode[g]);
                key.extend(to_f64(&sim_h.encode[h]));
                (key, to_f64(&sim_n.encode[f[h][g]]))
            })
            .collect()
    };
    let bound = (sim_n.rep_size.max(sim_h.rep_size) - 1) as f64;
    let mix = build_interp_mlp_nd(&table(&phi_inv), 1.0, bound, bound)?;
    let unmix = build_interp_mlp_nd(&table(&phi.to_vec()), 1.0, bound, bound)?;
    let st = stack(sim_n, sim_h, &mix, &unmix);
    let encode = (0..group.n)
        .map(|x| {
            let mut e = sim_n.encode[x % nn].clone();
            e.extend(&sim_h.encode[x / nn]);
            e
        })
        .collect();
    Ok(GroupSim {
        name: format!("{}:{}", sim_n.name, sim_h.name),
        group,
        t_max: sim_n.t_max,
        dim: st.dim,
        rep_dims: st.n_rep.into_iter().chain(st.h_rep).collect(),
        rep_size: sim_n.rep_size.max(sim_h.rep_size),
        encode,
        layers: st.layers,
    })
}

/// Permutes `p` blocks of `r` channels by the H element in the last input.
///
/// `src[v][x]` is the block copied into slot `x` when the H code equals `v`.
/// Layer 1 detects the code with trapezoid bumps and passes the blocks
/// through; layer 2 gates each candidate block with a big negative bias
/// that the indicator cancels; layer 3 sums the candidates per slot.
fn reindex_mlp(p: usize, r: usize, src: &[Vec<usize>], big: f64) -> Mlp {
    let v_count = src.len();
    let h_in = p * r;
    let w1_cols = 4 * v_count + p * r;
    let mut w1 = SparseMat::zeros(p * r + 1, w1_cols);
    let mut b1 = vec![0.0; w1_cols];
    const BUMP: [(f64, f64); 4] = [(2.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-2.0, 1.0)];
    for v in 0..v_count {
        for (k, &(off, _)) in BUMP.iter().enumerate() {
            w1.push(h_in, 4 * v + k, 4.0);
            b1[4 * v + k] = -4.0 * v as f64 + off;
        }
    }
    for i in 0..p * r {
        w1.push(i, 4 * v_count + i, 1.0);
    }
    let unit = |x: usize, v: usize, c: usize| (x * v_count + v) * r + c;
    let w2_cols = p * v_count * r;
    let mut w2 = SparseMat::zeros(w1_cols, w2_cols);
    let b2 = vec![-big; w2_cols];
    let mut w3 = SparseMat::zeros(w2_cols, p * r);
    for x in 0..p {
        for v in 0..v_count {
            for c in 0..r {
                let u = unit(x, v, c);
                for (k, &(_, sign)) in BUMP.iter().enumerate() {
                    w2.push(4 * v + k, u, big * sign);
                }
                w2.push(4 * v_count + src[v][x] * r + c, u, 1.0);
                w3.push(u, x * r + c, 1.0);
            }
        }
    }
    Mlp::new(vec![Affine::new(w1, b1), Affine::new(w2, b2), Affine::new(w3, vec![0.0; p * r])]).expect("widths chain")
}

/// Layers of `N ≀ H` for an H simulator with one channel whose code for `h`
/// is `encode[h][0]`; copies are indexed by elements of H and
/// `φ_h(f)(x) = f(x·h)`.
fn wreath_stack(sim_n: &GroupSim, sim_h: &GroupSim) -> Result<(GroupSim, Stacked)> {
    if sim_h.rep_dim() != 1 {
        return Err(Error::Unsupported(format!("wreath needs an H simulator with one channel, got {}", sim_h.rep_dim())));
    }
    let p = sim_h.group.n;
    let codes: Vec<i64> = (0..p).map(|h| sim_h.encode[h][0]).collect();
    if (0..p as i64).any(|v| !codes.contains(&v)) {
        return input("H codes must be exactly 0..|H|");
    }
    let elem_of = |v: usize| codes.iter().position(|&c| c == v as i64).unwrap();
    let hm = &sim_h.group;
    let src_unmix: Vec<Vec<usize>> = (0..p).map(|v| (0..p).map(|x| hm.op(x, elem_of(v))).collect()).collect();
    let src_mix: Vec<Vec<usize>> = (0..p).map(|v| (0..p).map(|x| hm.op(x, hm.inv[elem_of(v)])).collect()).collect();
    let copies = combine_direct_product(&vec![sim_n.clone(); p])?;
    let r = sim_n.rep_dim();
    let big = sim_n.rep_size as f64;
    let mix = reindex_mlp(p, r, &src_mix, big);
    let unmix = reindex_mlp(p, r, &src_unmix, big);
    let st = stack(&copies, sim_h, &mix, &unmix);
    Ok((copies, st))
}

/// `N ≀ H = N^{|H|} ⋊ H` with H permuting the copies.
pub fn combine_wreath(sim_n: &GroupSim, sim_h: &GroupSim) -> Result<GroupSim> {
    same_t(&[sim_n, sim_h])?;
    let (copies, st) = wreath_stack(sim_n, sim_h)?;
    let p = sim_h.group.n;
    let nn = sim_n.group.n;
    let base = &copies.group;
    let digits = |f: usize| -> Vec<usize> { (0..p).map(|k| f / nn.pow(k as u32) % nn).collect() };
    let undigits = |d: &[usize]| -> usize { d.iter().rev().fold(0, |acc, &x| acc * nn + x) };
    let phi: Vec<Vec<usize>> = (0..p)
        .map(|h| {
            (0..base.n)
                .map(|f| {
                    let d = digits(f);
                    let moved: Vec<usize> = (0..p).map(|x| d[sim_h.group.op(x, h)]).collect();
                    undigits(&moved)
                })
                .collect()
        })
        .collect();
    let group = GroupTable::semidirect_product(base, &sim_h.group, &phi)?;
    let encode = (0..group.n)
        .map(|x| {
            let mut e = copies.encode[x % base.n].clone();
            e.extend(&sim_h.encode[x / base.n]);
            e
        })
        .collect();
    Ok(GroupSim {
        name: format!("{}wr{}", sim_n.name, sim_h.name),
        group,
        t_max: sim_n.t_max,
        dim: st.dim,
        rep_dims: st.n_rep.into_iter().chain(st.h_rep).collect(),
        rep_size: sim_n.rep_size.max(sim_h.rep_size),
        encode,
        layers: st.layers,
    })
}

/// Wreath layers carrying a target group `target` embedded by `embed`, which
/// sends an element to its copy values (elements of N, one per H element)
/// and its H element. The full wreath table is never built.
pub fn combine_wreath_embedded(
    sim_n: &GroupSim,
    sim_h: &GroupSim,
    name: &str,
    target: GroupTable,
    embed: &dyn Fn(usize) -> (Vec<usize>, usize),
) -> Result<GroupSim> {
    same_t(&[sim_n, sim_h])?;
    let (_, st) = wreath_stack(sim_n, sim_h)?;
    let encode = (0..target.n)
        .map(|g| {
            let (f, h) = embed(g);
            let mut e: Vec<i64> = f.iter().flat_map(|&x| sim_n.encode[x].clone()).collect();
            e.extend(&sim_h.encode[h]);
            e
        })
        .collect();
    let sim = GroupSim {
        name: name.into(),
        group: target,
        t_max: sim_n.t_max,
        dim: st.dim,
        rep_dims: st.n_rep.into_iter().chain(st.h_rep).collect(),
        rep_size: sim_n.rep_size.max(sim_h.rep_size),
        encode,
        layers: st.layers,
    };
    sim.check_encoding()?;
    Ok(sim)
}

/// Size table entries of a simulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSize {
    pub depth: f64,
    pub dim: f64,
    pub heads: f64,
    pub head_dim: f64,
    pub mlp_width: f64,
    pub norm: f64,
    pub rep_dim: f64,
    pub rep_size: f64,
}

impl SimSize {
    pub fn measure(sim: &GroupSim) -> Result<SimSize> {
        let m = sim.metrics()?;
        Ok(SimSize {
            depth: m.depth as f64,
            dim: m.embed_dim as f64,
            heads: m.max_heads as f64,
            head_dim: m.max_head_dim as f64,
            mlp_width: m.mlp_width as f64,
            norm: norm(&m),
            rep_dim: sim.rep_dim() as f64,
            rep_size: sim.rep_size as f64,
        })
    }

    pub fn direct(parts: &[SimSize]) -> SimSize {
        let max = |f: fn(&SimSize) -> f64| parts.iter().map(f).fold(0.0, f64::max);
        let sum = |f: fn(&SimSize) -> f64| parts.iter().map(f).sum::<f64>();
        SimSize {
            depth: max(|s| s.depth),
            dim: sum(|s| s.dim),
            heads: sum(|s| s.heads),
            head_dim: max(|s| s.head_dim),
            mlp_width: sum(|s| s.mlp_width),
            norm: max(|s| s.norm),
            rep_dim: sum(|s| s.rep_dim),
            rep_size: max(|s| s.rep_size),
        }
    }

    pub fn semidirect(n: &SimSize, h: &SimSize, order: f64) -> SimSize {
        SimSize {
            depth: n.depth + h.depth + 2.0,
            dim: n.dim + h.dim,
            heads: n.heads.max(h.heads),
            head_dim: n.head_dim.max(h.head_dim),
            mlp_width: n.mlp_width.max(h.mlp_width).max(4.0 * order),
            norm: n.norm.max(h.norm).max(6.0 * n.rep_size.max(h.rep_size)).max(n.rep_dim + h.rep_dim),
            rep_dim: n.rep_dim + h.rep_dim,
            rep_size: n.rep_size.max(h.rep_size),
        }
    }

    pub fn wreath(n: &SimSize, h: &SimSize, n_order: f64, h_order: f64) -> SimSize {
        SimSize {
            depth: n.depth + h.depth + 2.0,
            dim: h_order * n.dim + h.dim,
            heads: (h_order * n.heads).max(h.heads),
            head_dim: n.head_dim.max(h.head_dim),
            mlp_width: (h_order * n.mlp_width).max(h.mlp_width).max(5.0 * h_order * h_order * n_order),
            norm: n.norm.max(h.norm).max(6.0 * h_order),
            rep_dim: h_order * n.rep_dim + 1.0,
            rep_size: n.rep_size.max(h.rep_size),
        }
    }

    /// Adds one check per entry; depth, head dim and rep dims must match exactly.
    pub fn check(&self, measured: &SimSize, r: &mut CompileReport) {
        r.equals("depth", measured.depth, self.depth)
            .at_most("embed_dim", measured.dim, self.dim)
            .at_most("heads", measured.heads, self.heads)
            .at_most("head_dim", measured.head_dim, self.head_dim)
            .at_most("mlp_width", measured.mlp_width, self.mlp_width)
            .at_most("norm", measured.norm, self.norm)
            .equals("rep_dim", measured.rep_dim, self.rep_dim)
            .at_most("rep_size", measured.rep_size, self.rep_size);
    }
}

/// Checks a product simulator against the size table built from its parts.
pub fn product_report(kind: &str, sim: &GroupSim, expected: &SimSize) -> Result<CompileReport> {
    let measured = SimSize::measure(sim)?;
    let mut r = CompileReport::new(format!("{kind}:{}", sim.name), sim.t_max, sim.metrics()?);
    expected.check(&measured, &mut r);
    Ok(r)
}
