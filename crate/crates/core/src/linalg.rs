//! Thin wrappers over the dense backend with a fixed, sequential reduction
//! order so that every result is bit-reproducible.

use std::sync::Once;

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::linalg::solvers::DenseSolveCore;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::c64;
use crate::error::{bail, Result};

static SEQUENTIAL: Once = Once::new();

/// Pins the backend to sequential kernels.
pub fn pin_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

pub fn mul<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> Mat<c64>
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    mul_into(out.as_mut(), a, b, false);
    out
}

/// `dst = a b` or `dst += a b`.
pub fn mul_into<L, R>(dst: MatMut<'_, c64>, a: MatRef<'_, L>, b: MatRef<'_, R>, accumulate: bool)
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    let accum = if accumulate { Accum::Add } else { Accum::Replace };
    matmul(dst, accum, a, b, c64::new(1.0, 0.0), Par::Seq);
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors.
pub fn hermitian_eigen(h: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = h.nrows();
    if n != h.ncols() {
        bail!(Calculus, "eigendecomposition of a non-square {}x{} matrix", n, h.ncols());
    }
    let mut s = Diag::<c64>::zeros(n);
    let mut u = Mat::<c64>::zeros(n, n);
    let par = Par::Seq;
    let req = self_adjoint_evd_scratch::<c64>(n, ComputeEigenvectors::Yes, par, Default::default());
    let mut mem = MemBuffer::new(req);
    self_adjoint_evd(h, s.as_mut(), Some(u.as_mut()), par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| crate::Error::Calculus(format!("eigendecomposition failed: {e:?}")))?;
    let values = (0..n).map(|i| s[i].re).collect();
    Ok((values, u))
}

/// Inverse of a square matrix by partial-pivoting LU.
pub fn inverse(m: MatRef<'_, c64>) -> Mat<c64> {
    pin_sequential();
    m.partial_piv_lu().inverse()
}

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max |m - m^†|`.
pub fn hermitian_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

/// `max |a - b|`.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}
