use faer::{Mat, MatRef};

use super::DensityFunction;
use crate::c64;
use crate::error::{bail, Result};
use crate::linalg;
use crate::operator::{LatticeOperator, SparseOperator};

/// Eigendecomposition `H = V diag(λ) V^†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralData {
    values: Vec<f64>,
    vectors: Mat<c64>,
}

impl SpectralData {
    pub fn new(h: &LatticeOperator) -> Result<Self> {
        if !h.is_hermitian() {
            bail!(Calculus, "spectral data needs a hermitian operator");
        }
        Self::from_matrix(h.matrix().as_ref())
    }

    pub fn from_matrix(h: MatRef<'_, c64>) -> Result<Self> {
        let (values, vectors) = linalg::hermitian_eigen(h)?;
        Ok(Self { values, vectors })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Mat<c64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |H V - V diag(λ)|`.
    pub fn residual(&self, h: MatRef<'_, c64>) -> f64 {
        let hv = linalg::mul(h, self.vectors.as_ref());
        let n = self.dim();
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                best = best.max((hv[(i, j)] - self.vectors[(i, j)] * self.values[j]).norm());
            }
        }
        best
    }

    /// Index ranges of eigenvalues closer than `eps` to their neighbours.
    pub fn clusters(&self, eps: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.values.len() {
            if i == self.values.len() || self.values[i] - self.values[i - 1] >= eps {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// `f(H) = V diag(f(λ)) V^†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat<c64> {
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        self.back_diagonal_scaled(&d)
    }

    fn back_diagonal_scaled(&self, d: &[f64]) -> Mat<c64> {
        let v = &self.vectors;
        let n = self.dim();
        let keep: Vec<usize> = (0..n).filter(|&k| d[k] != 0.0).collect();
        let vk = Mat::from_fn(n, keep.len(), |i, c| v[(i, keep[c])]);
        let scaled = Mat::from_fn(n, keep.len(), |i, c| v[(i, keep[c])] * d[keep[c]]);
        linalg::mul(scaled.as_ref(), vk.adjoint())
    }

    /// `V^† X V` for a dense `X`.
    pub fn to_eigenbasis(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let xv = linalg::mul(x, self.vectors.as_ref());
        linalg::mul(self.vectors.adjoint(), xv.as_ref())
    }

    /// `V^† X V` for a sparse `X`, touching only rows where `X` is nonzero.
    pub fn sparse_to_eigenbasis(&self, x: &SparseOperator) -> Mat<c64> {
        let n = self.dim();
        let rows = x.row_support();
        if rows.is_empty() {
            return Mat::zeros(n, n);
        }
        let xv = x.mul_dense_rows(self.vectors.as_ref(), &rows);
        if rows.len() == n {
            linalg::mul(self.vectors.adjoint(), xv.as_ref())
        } else {
            let vr = Mat::from_fn(rows.len(), n, |i, j| self.vectors[(rows[i], j)]);
            linalg::mul(vr.adjoint(), xv.as_ref())
        }
    }

    /// `V Y V^†`.
    pub fn from_eigenbasis(&self, y: MatRef<'_, c64>) -> Mat<c64> {
        let vy = linalg::mul(self.vectors.as_ref(), y);
        linalg::mul(vy.as_ref(), self.vectors.adjoint())
    }

    /// Diagonal entries `(V Y V^†)_kk` for the states `k` in `rows`.
    pub fn diagonal_from_eigenbasis(&self, y: MatRef<'_, c64>, rows: &[usize]) -> Vec<c64> {
        let n = self.dim();
        let vr = Mat::from_fn(rows.len(), n, |i, j| self.vectors[(rows[i], j)]);
        let z = linalg::mul(vr.as_ref(), y);
        (0..rows.len()).map(|i| (0..n).fold(c64::new(0.0, 0.0), |acc, c| acc + z[(i, c)] * vr[(i, c)].conj())).collect()
    }
}

/// First divided difference `ρ[a, b]`, confluent below `eps`.
pub fn divided_difference_1(rho: &DensityFunction, a: f64, b: f64, eps: f64) -> f64 {
    if (a - b).abs() < eps {
        rho.derivative(0.5 * (a + b), 1)
    } else {
        (rho.value(a) - rho.value(b)) / (a - b)
    }
}

/// Second divided difference `ρ[a, b, c]`, with confluent limits for clusters closer than `eps`.
pub fn divided_difference_2(rho: &DensityFunction, a: f64, b: f64, c: f64, eps: f64) -> f64 {
    let mut x = [a, b, c];
    x.sort_by(f64::total_cmp);
    let [x0, x1, x2] = x;
    if x2 - x0 < eps {
        0.5 * rho.derivative((x0 + x1 + x2) / 3.0, 2)
    } else if x1 - x0 < eps {
        let m = 0.5 * (x0 + x1);
        (divided_difference_1(rho, m, x2, eps) - rho.derivative(m, 1)) / (x2 - m)
    } else if x2 - x1 < eps {
        let m = 0.5 * (x1 + x2);
        (rho.derivative(m, 1) - divided_difference_1(rho, x0, m, eps)) / (m - x0)
    } else {
        (divided_difference_1(rho, x1, x2, eps) - divided_difference_1(rho, x0, x1, eps)) / (x2 - x0)
    }
}

/// `f(H)` through the eigendecomposition.
pub fn spectral_function(h: &LatticeOperator, f: impl Fn(f64) -> f64) -> Result<LatticeOperator> {
    let spec = SpectralData::new(h)?;
    Ok(LatticeOperator::hermitian_unchecked(h.sample().clone(), spec.apply(f)))
}
