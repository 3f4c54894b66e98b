use std::f64::consts::PI;

/// Points `(cos 2πt/period, sin 2πt/period)` for each `t` in `range`.
pub fn circle_positions(period: usize, range: std::ops::RangeInclusive<i64>) -> Vec<[f64; 2]> {
    range
        .map(|t| {
            let a = 2.0 * PI * t as f64 / period as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Largest inner product between two distinct points of `circle_positions(period, 0..=period-1)`.
pub fn max_offdiag_inner(period: usize) -> f64 {
    let p = circle_positions(period, 0..=period as i64 - 1);
    let mut best = f64::NEG_INFINITY;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j {
                best = best.max(p[i][0] * p[j][0] + p[i][1] * p[j][1]);
            }
        }
    }
    best
}

/// Rotation by angle `theta` as a 2×2 row-major matrix acting on row vectors.
pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// ℓ1 distance between `softmax(z)` and the one-hot vector at `argmax z`.
pub fn softmax_onehot_l1(z: &[f64]) -> f64 {
    let p = super::blocks::softmax(z);
    let star = z
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    p.iter().enumerate().map(|(i, &v)| if i == star { (1.0 - v).abs() } else { v.abs() }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let p = circle_positions(4, 0..=3);
        assert_eq!(p[0], [1.0, 0.0]);
        let m = max_offdiag_inner(16);
        assert!((m - (2.0 * PI / 16.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn rotation_invariance() {
        let p = circle_positions(10, 0..=9);
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        for t in 0..7 {
            assert!((dot(p[t], p[t + 3]) - dot(p[0], p[3])).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_moves_points() {
        let p = circle_positions(8, 0..=7);
        let r = rotation(2.0 * PI / 8.0);
        let x = [p[2][0] * r[0][0] + p[2][1] * r[1][0], p[2][0] * r[0][1] + p[2][1] * r[1][1]];
        assert!((x[0] - p[3][0]).abs() < 1e-12 && (x[1] - p[3][1]).abs() < 1e-12);
    }
}
