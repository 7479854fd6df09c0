use faer::{Mat, MatRef};

use crate::c64;

/// Compressed-row matrix holding the exact nonzeros of a dense operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<c64>,
}

impl SparseOperator {
    pub fn from_dense(m: MatRef<'_, c64>) -> Self {
        let n = m.nrows();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != c64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self { dim: n, row_start, cols, vals }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, c64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_start = vec![0; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<c64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_start[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_start[i + 1] += row_start[i];
        }
        Self { dim, row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Same pattern with entries `f(i, j, value)`; exact zeros are dropped.
    pub fn map(&self, f: impl Fn(usize, usize, c64) -> c64) -> Self {
        let triplets = self.iter().map(|(i, j, v)| (i, j, f(i, j, v))).filter(|t| t.2 != c64::new(0.0, 0.0)).collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// `[self, diag(d)]`, entries `A_ij (d_j - d_i)`.
    pub fn commutator_with_diagonal(&self, d: &[f64]) -> Self {
        self.map(|i, j, v| v * (d[j] - d[i]))
    }

    /// Rows holding at least one nonzero.
    pub fn row_support(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.row_start[i + 1] > self.row_start[i]).collect()
    }

    /// `max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    /// `(self * b)` restricted to the rows in `rows`, as a `rows.len() x b.ncols()` matrix.
    pub fn mul_dense_rows(&self, b: MatRef<'_, c64>, rows: &[usize]) -> Mat<c64> {
        let mut out = Mat::zeros(rows.len(), b.ncols());
        for c in 0..b.ncols() {
            let col = b.col(c);
            for (r, &i) in rows.iter().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for (j, v) in self.row(i) {
                    acc += v * col[j];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}
