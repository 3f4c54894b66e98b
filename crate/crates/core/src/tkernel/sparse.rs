use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Real matrix stored as `(row, col, value)` triplets, zeros omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

/// Row-compressed form used for evaluation.
#[derive(Clone, Debug)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.push(i, i, 1.0);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.push(i, j, v);
            }
        }
        m
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) outside {}x{}", self.rows, self.cols);
        if v != 0.0 {
            self.entries.push((r, c, v));
        }
    }

    /// Sums duplicate coordinates and drops zeros.
    pub fn normalized(&self) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(r, c, v) in &self.entries {
            *acc.entry((r, c)).or_insert(0.0) += v;
        }
        SparseMat {
            rows: self.rows,
            cols: self.cols,
            entries: acc.into_iter().filter(|&(_, v)| v != 0.0).map(|((r, c), v)| (r, c, v)).collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries.iter().filter(|e| e.0 == r && e.1 == c).map(|e| e.2).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            d[r][c] += v;
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.normalized().entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    pub fn transpose(&self) -> Self {
        SparseMat {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }

    pub fn matmul(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let b = other.to_csr();
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(r, k, v) in &self.entries {
            for p in b.indptr[k]..b.indptr[k + 1] {
                *acc.entry((r, b.indices[p])).or_insert(0.0) += v * b.values[p];
            }
        }
        SparseMat {
            rows: self.rows,
            cols: other.cols,
            entries: acc.into_iter().filter(|&(_, v)| v != 0.0).map(|((r, c), v)| (r, c, v)).collect(),
        }
    }

    /// Re-indexes rows and columns into a larger matrix.
    pub fn relocate(&self, rows: usize, cols: usize, row_map: &dyn Fn(usize) -> usize, col_map: &dyn Fn(usize) -> usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for &(r, c, v) in &self.entries {
            m.push(row_map(r), col_map(c), v);
        }
        m
    }

    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        self.relocate(rows, cols, &|r| r, &|c| c)
    }

    pub fn row_dense(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for &(i, c, v) in &self.entries {
            if i == r {
                out[c] += v;
            }
        }
        out
    }

    pub fn to_csr(&self) -> Csr {
        let mut counts = vec![0usize; self.rows + 1];
        for &(r, _, _) in &self.entries {
            counts[r + 1] += 1;
        }
        for i in 0..self.rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut indices = vec![0; self.entries.len()];
        let mut values = vec![0.0; self.entries.len()];
        for &(r, c, v) in &self.entries {
            indices[next[r]] = c;
            values[next[r]] = v;
            next[r] += 1;
        }
        Csr { rows: self.rows, cols: self.cols, indptr: counts, indices, values }
    }
}

impl Csr {
    /// `out += x · M`, skipping zero entries of `x`.
    pub fn accumulate_vecmat(&self, x: &[f64], out: &mut [f64]) {
        for (r, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            for p in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[p]] += xv * self.values[p];
            }
        }
    }

    pub fn row_is_empty(&self, r: usize) -> bool {
        self.indptr[r] == self.indptr[r + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMat::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        let b = SparseMat::from_dense(&[vec![0.0, 1.0, 4.0], vec![5.0, 0.0, 0.0]]);
        assert_eq!(a.matmul(&b).to_dense(), vec![vec![10.0, 1.0, 4.0], vec![15.0, 0.0, 0.0]]);
    }

    #[test]
    fn vecmat() {
        let a = SparseMat::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]).to_csr();
        let mut out = vec![0.0; 2];
        a.accumulate_vecmat(&[2.0, 1.0], &mut out);
        assert_eq!(out, vec![2.0, 7.0]);
    }
}
