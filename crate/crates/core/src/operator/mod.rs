//! Dense operators on a finite sample, commutators, multipliers and traces.

mod decay;
mod export;
mod pv;
mod sparse;

use std::sync::Arc;

use faer::Mat;

use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::{LatticeSample, Region, SwitchProfile, SPIN_DIM};
use crate::linalg;

pub use decay::{verify_decay, verify_tight_binding, DecayFit};
pub use export::{read_binary, write_binary, write_triplets_csv};
pub use pv::{pv_trace_x1, pv_trace_x1_diagonal, PvTraceTrail};
pub use sparse::SparseOperator;

/// Tolerance on `|A - A^†|` for operators flagged hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hermiticity {
    Hermitian,
    General,
}

/// Dense matrix acting on `l^2(sample) ⊗ C^2`.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    sample: Arc<LatticeSample>,
    matrix: Mat<c64>,
    hermiticity: Hermiticity,
}

pub(crate) fn same_geometry(a: &Arc<LatticeSample>, b: &Arc<LatticeSample>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl LatticeOperator {
    pub fn new(sample: Arc<LatticeSample>, matrix: Mat<c64>, hermiticity: Hermiticity) -> Result<Self> {
        let n = sample.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            bail!(Operator, "matrix is {}x{} but the sample has dimension {n}", matrix.nrows(), matrix.ncols());
        }
        if hermiticity == Hermiticity::Hermitian {
            let defect = linalg::hermitian_defect(matrix.as_ref());
            let scale = linalg::max_abs(matrix.as_ref()).max(1.0);
            if defect > HERMITIAN_TOL * scale {
                bail!(Operator, "operator flagged hermitian has |A - A^†| = {defect:e}");
            }
        }
        Ok(Self { sample, matrix, hermiticity })
    }

    /// Hermitian operator whose flag is trusted; symmetrizes rounding noise.
    pub(crate) fn hermitian_unchecked(sample: Arc<LatticeSample>, mut matrix: Mat<c64>) -> Self {
        let n = matrix.nrows();
        for j in 0..n {
            matrix[(j, j)].im = 0.0;
            for i in 0..j {
                let v = (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5;
                matrix[(i, j)] = v;
                matrix[(j, i)] = v.conj();
            }
        }
        Self { sample, matrix, hermiticity: Hermiticity::Hermitian }
    }

    pub(crate) fn general_unchecked(sample: Arc<LatticeSample>, matrix: Mat<c64>) -> Self {
        Self { sample, matrix, hermiticity: Hermiticity::General }
    }

    pub fn zeros(sample: Arc<LatticeSample>) -> Self {
        let n = sample.dim();
        Self { sample, matrix: Mat::zeros(n, n), hermiticity: Hermiticity::Hermitian }
    }

    pub fn identity(sample: Arc<LatticeSample>) -> Self {
        Self::diagonal(sample.clone(), &vec![1.0; sample.dim()])
    }

    /// Real diagonal operator with one entry per state.
    pub fn diagonal(sample: Arc<LatticeSample>, values: &[f64]) -> Self {
        let n = sample.dim();
        assert_eq!(values.len(), n, "one diagonal entry per state");
        let mut matrix = Mat::zeros(n, n);
        for (k, &v) in values.iter().enumerate() {
            matrix[(k, k)] = c64::new(v, 0.0);
        }
        Self { sample, matrix, hermiticity: Hermiticity::Hermitian }
    }

    pub fn sample(&self) -> &Arc<LatticeSample> {
        &self.sample
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity(&self) -> Hermiticity {
        self.hermiticity
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity == Hermiticity::Hermitian
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.matrix[(i, j)]
    }

    pub fn diagonal_entries(&self) -> Vec<c64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)]).collect()
    }

    /// Diagonal entries if every off-diagonal entry is exactly zero.
    pub fn as_diagonal(&self) -> Option<Vec<c64>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.matrix[(i, j)] != c64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some(self.diagonal_entries())
    }

    pub fn adjoint(&self) -> Self {
        Self { sample: self.sample.clone(), matrix: self.matrix.adjoint().to_owned(), hermiticity: self.hermiticity }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !same_geometry(&self.sample, &other.sample) {
            bail!(Operator, "operators live on different samples");
        }
        Ok(())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let matrix = linalg::mul(self.matrix.as_ref(), other.matrix.as_ref());
        Ok(Self::general_unchecked(self.sample.clone(), matrix))
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: c64, other: &Self, beta: c64) -> Result<Self> {
        self.check_same(other)?;
        let n = self.dim();
        let matrix = Mat::from_fn(n, n, |i, j| alpha * self.matrix[(i, j)] + beta * other.matrix[(i, j)]);
        let real = alpha.im == 0.0 && beta.im == 0.0;
        let hermiticity = if real && self.is_hermitian() && other.is_hermitian() {
            Hermiticity::Hermitian
        } else {
            Hermiticity::General
        };
        Ok(Self { sample: self.sample.clone(), matrix, hermiticity })
    }

    pub fn scaled(&self, alpha: c64) -> Self {
        let n = self.dim();
        let hermiticity = if alpha.im == 0.0 { self.hermiticity } else { Hermiticity::General };
        Self {
            sample: self.sample.clone(),
            matrix: Mat::from_fn(n, n, |i, j| alpha * self.matrix[(i, j)]),
            hermiticity,
        }
    }

    /// `max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(self.matrix.as_ref())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(self.matrix.as_ref(), other.matrix.as_ref())
    }

    /// Nonzero entries in sparse form.
    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_dense(self.matrix.as_ref())
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &LatticeOperator, b: &LatticeOperator) -> Result<LatticeOperator> {
    let ab = a.product(b)?;
    let ba = b.product(a)?;
    ab.combine(c64::new(1.0, 0.0), &ba, c64::new(-1.0, 0.0)).map(|mut c| {
        c.hermiticity = Hermiticity::General;
        c
    })
}

/// `{A, B} = AB + BA`.
pub fn anticommutator(a: &LatticeOperator, b: &LatticeOperator) -> Result<LatticeOperator> {
    let ab = a.product(b)?;
    let ba = b.product(a)?;
    let mut out = ab.combine(c64::new(1.0, 0.0), &ba, c64::new(1.0, 0.0))?;
    out.hermiticity = if a.is_hermitian() && b.is_hermitian() { Hermiticity::Hermitian } else { Hermiticity::General };
    Ok(out)
}

/// Spin value `+1/2` or `-1/2` of state `k`.
pub fn spin_of_state(k: usize) -> f64 {
    if k % SPIN_DIM == 0 {
        0.5
    } else {
        -0.5
    }
}

/// `S = Id ⊗ σ_z / 2`.
pub fn spin_operator(sample: Arc<LatticeSample>) -> LatticeOperator {
    let values: Vec<f64> = (0..sample.dim()).map(spin_of_state).collect();
    LatticeOperator::diagonal(sample, &values)
}

/// Per-state values of a position multiplier `f(x)` (identity on spin).
pub fn multiplier_values(sample: &LatticeSample, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let per_site: Vec<f64> = sample.sites().iter().map(|s| f(s.pos)).collect();
    sample.expand(&per_site)
}

/// Diagonal multiplication by `f(x)`.
pub fn diag_multiplier(sample: Arc<LatticeSample>, f: impl Fn([f64; 2]) -> f64) -> LatticeOperator {
    let values = multiplier_values(&sample, f);
    LatticeOperator::diagonal(sample, &values)
}

/// Multiplication by a switch function.
pub fn switch_operator(sample: Arc<LatticeSample>, profile: &SwitchProfile) -> Result<LatticeOperator> {
    profile.validate()?;
    Ok(diag_multiplier(sample, |x| profile.value(x)))
}

/// `Tr(1_Ω A)`.
pub fn region_trace(a: &LatticeOperator, region: &Region) -> Result<c64> {
    if region.mask().len() != a.sample().len() {
        bail!(Operator, "region and operator live on different samples");
    }
    Ok(region_trace_diagonal(&a.diagonal_entries(), region))
}

/// `Tr(1_Ω A)` from the diagonal of `A`.
pub fn region_trace_diagonal(diagonal: &[c64], region: &Region) -> c64 {
    diagonal
        .iter()
        .enumerate()
        .filter(|(k, _)| region.contains_state(*k))
        .fold(c64::new(0.0, 0.0), |acc, (_, v)| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_bulk_sample, core_region, LatticeSpec};

    fn one_site() -> Arc<LatticeSample> {
        let spec = LatticeSpec::square();
        Arc::new(build_bulk_sample(&spec, [0.5, 0.5]).unwrap())
    }

    fn pauli(sample: &Arc<LatticeSample>, which: char) -> LatticeOperator {
        let z = c64::new(0.0, 0.0);
        let m = match which {
            'x' => [[z, c64::new(1.0, 0.0)], [c64::new(1.0, 0.0), z]],
            'y' => [[z, c64::new(0.0, -1.0)], [c64::new(0.0, 1.0), z]],
            _ => [[c64::new(1.0, 0.0), z], [z, c64::new(-1.0, 0.0)]],
        };
        LatticeOperator::new(sample.clone(), Mat::from_fn(2, 2, |i, j| m[i][j]), Hermiticity::Hermitian).unwrap()
    }

    #[test]
    fn pauli_algebra() {
        let s = one_site();
        assert_eq!(s.len(), 1);
        let sz = spin_operator(s.clone());
        assert_eq!(sz.diagonal_entries(), vec![c64::new(0.5, 0.0), c64::new(-0.5, 0.0)]);
        let c = commutator(&pauli(&s, 'x'), &sz).unwrap();
        let expected = pauli(&s, 'y').scaled(c64::new(0.0, -1.0));
        assert!(c.max_abs_diff(&expected) < 1e-15);
        let ac = anticommutator(&pauli(&s, 'x'), &pauli(&s, 'x')).unwrap();
        assert!(ac.max_abs_diff(&LatticeOperator::identity(s).scaled(c64::new(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn rejects_mismatched_and_non_hermitian() {
        let s = one_site();
        let bad = Mat::from_fn(2, 2, |i, j| c64::new((i + 2 * j) as f64, 0.0));
        assert!(LatticeOperator::new(s.clone(), bad, Hermiticity::Hermitian).is_err());
        let other = Arc::new(build_bulk_sample(&LatticeSpec::square(), [1.0, 1.0]).unwrap());
        assert!(commutator(&spin_operator(s), &spin_operator(other)).is_err());
    }

    #[test]
    fn traces() {
        let s = Arc::new(build_bulk_sample(&LatticeSpec::square(), [2.0, 2.0]).unwrap());
        let core = core_region(&s, [0.5, 0.5]).unwrap();
        let id = LatticeOperator::identity(s.clone());
        assert_eq!(region_trace(&id, &core).unwrap(), c64::new(18.0, 0.0));
        assert_eq!(region_trace(&spin_operator(s), &core).unwrap(), c64::new(0.0, 0.0));
    }
}
