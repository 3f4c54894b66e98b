//! Weight gadgets: lookup-table interpolation, thresholds and function composition.

use super::blocks::{Affine, Mlp};
use super::sparse::SparseMat;
use crate::error::{input, Result};

// hidden biases of one trapezoid bump, relative to -4x/Δ, and output signs
const BUMP: [(f64, f64); 4] = [(2.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-2.0, 1.0)];

fn check_separated(values: &[f64], delta: f64) -> Result<()> {
    for w in values.windows(2) {
        if w[1] - w[0] < delta * (1.0 - 1e-9) {
            return input(format!("keys {} and {} are closer than Δ = {delta}", w[0], w[1]));
        }
    }
    Ok(())
}

fn sorted_distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite keys"));
    v.dedup();
    v
}

fn check_bounds<'a>(xs: impl Iterator<Item = &'a f64>, ys: impl Iterator<Item = &'a f64>, bx: f64, by: f64) -> Result<()> {
    for x in xs {
        if !x.is_finite() || x.abs() > bx {
            return input(format!("key {x} exceeds B_x = {bx}"));
        }
    }
    for y in ys {
        if !y.is_finite() || y.abs() > by {
            return input(format!("value {y} exceeds B_y = {by}"));
        }
    }
    Ok(())
}

/// 2-layer MLP on one scalar input reproducing `table` on every key ± Δ/4.
/// Hidden width is `4·|table|`.
pub fn build_interp_mlp_1d(table: &[(f64, Vec<f64>)], delta: f64, bx: f64, by: f64) -> Result<Mlp> {
    if table.is_empty() {
        return input("interpolation table is empty");
    }
    let d_out = table[0].1.len();
    if table.iter().any(|(_, y)| y.len() != d_out) {
        return input("table outputs have different widths");
    }
    check_bounds(table.iter().map(|e| &e.0), table.iter().flat_map(|e| e.1.iter()), bx, by)?;
    let keys: Vec<f64> = table.iter().map(|e| e.0).collect();
    let distinct = sorted_distinct(keys.clone());
    if distinct.len() != keys.len() {
        return input("duplicate table key");
    }
    check_separated(&distinct, delta)?;
    let n = table.len();
    let scale = 4.0 / delta;
    let mut w1 = SparseMat::zeros(1, 4 * n);
    let mut b1 = vec![0.0; 4 * n];
    let mut w2 = SparseMat::zeros(4 * n, d_out);
    for (i, (x, y)) in table.iter().enumerate() {
        for (k, &(off, sign)) in BUMP.iter().enumerate() {
            let h = 4 * i + k;
            w1.push(0, h, scale);
            b1[h] = -scale * x + off;
            for (c, &v) in y.iter().enumerate() {
                w2.push(h, c, sign * v);
            }
        }
    }
    Mlp::new(vec![Affine::new(w1, b1), Affine::new(w2, vec![0.0; d_out])])
}

/// 3-layer MLP reproducing `table` on every key tuple with each coordinate
/// perturbed by at most Δ/4. Hidden widths are `4·Σ|X_i|` and `|table|`.
pub fn build_interp_mlp_nd(table: &[(Vec<f64>, Vec<f64>)], delta: f64, bx: f64, by: f64) -> Result<Mlp> {
    if table.is_empty() {
        return input("interpolation table is empty");
    }
    let d_in = table[0].0.len();
    let d_out = table[0].1.len();
    if d_in == 0 {
        return input("table keys must have at least one coordinate");
    }
    if table.iter().any(|(x, y)| x.len() != d_in || y.len() != d_out) {
        return input("table entries have inconsistent widths");
    }
    check_bounds(table.iter().flat_map(|e| e.0.iter()), table.iter().flat_map(|e| e.1.iter()), bx, by)?;
    let coords: Vec<Vec<f64>> = (0..d_in).map(|i| sorted_distinct(table.iter().map(|e| e.0[i]).collect())).collect();
    for c in &coords {
        check_separated(c, delta)?;
    }
    let mut seen = std::collections::HashSet::new();
    for (x, _) in table {
        if !seen.insert(x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()) {
            return input("duplicate table key");
        }
    }
    let offsets: Vec<usize> = coords
        .iter()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += c.len();
            Some(o)
        })
        .collect();
    let width1 = 4 * coords.iter().map(|c| c.len()).sum::<usize>();
    let scale = 4.0 / delta;
    let mut w1 = SparseMat::zeros(d_in, width1);
    let mut b1 = vec![0.0; width1];
    for (i, c) in coords.iter().enumerate() {
        for (j, &v) in c.iter().enumerate() {
            for (k, &(off, _)) in BUMP.iter().enumerate() {
                let h = 4 * (offsets[i] + j) + k;
                w1.push(i, h, scale);
                b1[h] = -scale * v + off;
            }
        }
    }
    let n = table.len();
    let mut w2 = SparseMat::zeros(width1, n);
    let b2 = vec![-(d_in as f64 - 1.0); n];
    let mut w3 = SparseMat::zeros(n, d_out);
    for (r, (x, y)) in table.iter().enumerate() {
        for i in 0..d_in {
            let j = coords[i].iter().position(|&v| v == x[i]).unwrap();
            for (k, &(_, sign)) in BUMP.iter().enumerate() {
                w2.push(4 * (offsets[i] + j) + k, r, sign);
            }
        }
        for (c, &v) in y.iter().enumerate() {
            w3.push(r, c, v);
        }
    }
    Mlp::new(vec![Affine::new(w1, b1), Affine::new(w2, b2), Affine::new(w3, vec![0.0; d_out])])
}

/// `1[x > 0]` for `|x| ≥ Δ`, tolerant to perturbations of Δ/4. Width 2.
pub fn build_threshold_mlp(delta: f64) -> Mlp {
    let a = 1.0 / (1.5 * delta);
    let w1 = SparseMat::from_dense(&[vec![a, a]]);
    let w2 = SparseMat::from_dense(&[vec![1.0], vec![-1.0]]);
    Mlp::new(vec![Affine::new(w1, vec![0.5, -0.5]), Affine::new(w2, vec![0.0])]).unwrap()
}

/// Composition of transition maps on `n` states.
///
/// Inputs are `g` in dims `0..n` and `f` in dims `n..2n`, both as 1-based
/// image vectors. The output (dims `0..n`) is the 1-based image of `f ∘ g`.
/// Hidden widths are `n² + n` and `n²`; tolerant to input noise of 0.1.
pub fn build_composition_mlp(n: usize) -> Mlp {
    let nf = n as f64;
    let alpha = 1.0 / nf;
    let s = 2.5 * alpha * (nf + 1.0);
    let u = |q: usize, k: usize| q * n + (k - 1);
    let p = |q2: usize| n * n + q2;

    let mut w1 = SparseMat::zeros(2 * n, n * n + n);
    let mut b1 = vec![0.0; n * n + n];
    for q in 0..n {
        for k in 1..=n {
            w1.push(q, u(q, k), 1.0);
            b1[u(q, k)] = -(k as f64 - 0.5);
        }
        w1.push(n + q, p(q), alpha);
    }

    let mut w2 = SparseMat::zeros(n * n + n, n * n);
    let mut b2 = vec![0.0; n * n];
    for q in 0..n {
        for q2 in 0..n {
            let unit = q * n + q2;
            let k = q2 + 1;
            w2.push(p(q2), unit, 1.0);
            if k < n {
                w2.push(u(q, k + 1), unit, -s);
            }
            if k > 1 {
                w2.push(u(q, 1), unit, s);
                w2.push(u(q, k), unit, -s);
                b2[unit] = -s * (k as f64 - 1.0);
            }
        }
    }

    let mut w3 = SparseMat::zeros(n * n, n);
    for q in 0..n {
        for q2 in 0..n {
            w3.push(q * n + q2, q, nf);
        }
    }
    Mlp::new(vec![Affine::new(w1, b1), Affine::new(w2, b2), Affine::new(w3, vec![0.0; n])]).unwrap()
}

/// Per-coordinate input noise tolerated by [`build_composition_mlp`].
pub const COMPOSITION_NOISE: f64 = 0.1;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()))
    }

    #[test]
    fn indicator_bumps() {
        let m = build_interp_mlp_1d(&[(0.0, vec![0.0]), (1.0, vec![1.0])], 1.0, 1.0, 1.0).unwrap();
        assert!(close(&m.apply(&[0.2]), &[0.0]));
        assert!(close(&m.apply(&[0.95]), &[1.0]));
        assert_eq!(m.width(), 8);
    }

    #[test]
    fn separation_enforced() {
        assert!(build_interp_mlp_1d(&[(0.0, vec![0.0]), (0.5, vec![1.0])], 1.0, 1.0, 1.0).is_err());
        assert!(build_interp_mlp_nd(&[(vec![0.0], vec![0.0]), (vec![0.5], vec![1.0])], 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn xor_nd() {
        let t: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
            .map(|c| {
                let (a, b) = ((c & 1) as f64, (c >> 1) as f64);
                (vec![a, b], vec![((c & 1) ^ (c >> 1)) as f64])
            })
            .collect();
        let m = build_interp_mlp_nd(&t, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.hidden_widths(), vec![16, 4]);
        for (x, y) in &t {
            assert!(close(&m.apply(x), y));
            let shifted: Vec<f64> = x.iter().map(|v| v + 0.25).collect();
            assert!(close(&m.apply(&shifted), y));
        }
    }

    #[test]
    fn singleton_is_constant() {
        let m = build_interp_mlp_nd(&[(vec![3.0, 1.0], vec![7.0, -2.0])], 1.0, 3.0, 7.0).unwrap();
        assert!(close(&m.apply(&[3.1, 0.9]), &[7.0, -2.0]));
    }

    #[test]
    fn threshold() {
        let d = 0.3;
        let m = build_threshold_mlp(d);
        assert!(close(&m.apply(&[d]), &[1.0]));
        assert!(close(&m.apply(&[-d]), &[0.0]));
        assert!(close(&m.apply(&[10.0 * d]), &[1.0]));
        assert!(close(&m.apply(&[-d + d / 4.0]), &[0.0]));
        assert!(close(&m.apply(&[d - d / 4.0]), &[1.0]));
        assert_eq!(m.width(), 2);
        assert!(m.layers[0].w.max_abs() <= 1.0 / d);
    }

    #[test]
    fn composition_identity_f() {
        let m = build_composition_mlp(3);
        let g = [2.0, 3.0, 3.0];
        let mut x = g.to_vec();
        x.extend([1.0, 2.0, 3.0]);
        assert!(close(&m.apply(&x), &g));
        assert_eq!(m.hidden_widths(), vec![12, 9]);
        assert!(m.max_abs() <= 4.0 * 3.0 + 2.0);
    }
}
