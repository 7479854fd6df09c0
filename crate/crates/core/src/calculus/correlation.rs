use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::quadrature::{converge, resolvent};
use super::spectral::divided_difference_2;
use super::{AlmostAnalyticExtension, DensityFunction, SpectralData};
use crate::c64;
use crate::error::{bail, Result};
use crate::linalg;
use crate::operator::{commutator, LatticeOperator, SparseOperator};

/// How resolvent integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Closed form in the eigenbasis through divided differences of `ρ`.
    Spectral,
    /// Direct quadrature of the resolvent integral over the complex plane.
    Quadrature,
    /// Both, failing when they disagree beyond `cross_check_tol`.
    CrossCheck,
}

impl std::str::FromStr for Engine {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "quadrature" => Ok(Self::Quadrature),
            "cross-check" => Ok(Self::CrossCheck),
            other => bail!(Config, "unknown engine '{other}' (spectral, quadrature, cross-check)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalculusSettings {
    pub engine: Engine,
    /// Order `N` of the almost-analytic extension.
    pub taylor_order: usize,
    /// Half-width of the strip around the real axis left out of the quadrature.
    pub z_min: f64,
    /// Panels per ramp of `ρ` on the coarsest quadrature grid.
    pub quad_panels: usize,
    pub gl_order: usize,
    pub quad_tol: f64,
    pub max_refinements: usize,
    /// Eigenvalues closer than this are treated as degenerate in divided differences.
    pub dd_cluster_eps: f64,
    pub cross_check_tol: f64,
}

impl Default for CalculusSettings {
    fn default() -> Self {
        Self {
            engine: Engine::Spectral,
            taylor_order: 6,
            z_min: 1e-3,
            quad_panels: 2,
            gl_order: 8,
            quad_tol: 1e-7,
            max_refinements: 4,
            dd_cluster_eps: 1e-7,
            cross_check_tol: 1e-6,
        }
    }
}

/// `ρ[λ_a, λ_c]` table applied entrywise: `Y_ac = -πi ρ[λ_a, λ_c] X_ac`.
fn apply_first_difference(x: &mut Mat<c64>, values: &[f64], rho: &DensityFunction, eps: f64) {
    let r: Vec<f64> = values.iter().map(|&l| rho.value(l)).collect();
    let dr: Vec<f64> = values.iter().map(|&l| rho.derivative(l, 1)).collect();
    let n = values.len();
    for c in 0..n {
        for a in 0..n {
            let d = values[a] - values[c];
            let f = if d.abs() < eps { 0.5 * (dr[a] + dr[c]) } else { (r[a] - r[c]) / d };
            x[(a, c)] *= c64::new(0.0, -PI * f);
        }
    }
}

/// `X^OD = ∫ ∂ρ̃/∂z̄ R X R dm` in the eigenbasis: `-πi ρ[λ_a, λ_c] X̂_ac`.
fn od_hat(spec: &SpectralData, x_hat: Mat<c64>, rho: &DensityFunction, eps: f64) -> Mat<c64> {
    let mut y = x_hat;
    apply_first_difference(&mut y, spec.values(), rho, eps);
    y
}

fn spectral_off_diagonal(
    h: &LatticeOperator,
    a: &LatticeOperator,
    rho: &DensityFunction,
    eps: f64,
) -> Result<Mat<c64>> {
    let spec = SpectralData::new(h)?;
    let a_hat = spec.to_eigenbasis(a.matrix().as_ref());
    Ok(spec.from_eigenbasis(od_hat(&spec, a_hat, rho, eps).as_ref()))
}

/// `Σ = X^OD(A'B - B'A) - X^OD(A') B + X^OD(B') A` with `A' = [H, A]`, `B' = [H, B]`.
///
/// This follows from `R [H, X] R = X R - R X` applied to each triple product.
fn spectral_correlation(
    h: &LatticeOperator,
    a: &LatticeOperator,
    b: &LatticeOperator,
    rho: &DensityFunction,
    eps: f64,
) -> Result<Mat<c64>> {
    let spec = SpectralData::new(h)?;
    let da = commutator(h, a)?;
    let db = commutator(h, b)?;
    let od = |x: Mat<c64>| -> Mat<c64> {
        let x_hat = spec.to_eigenbasis(x.as_ref());
        spec.from_eigenbasis(od_hat(&spec, x_hat, rho, eps).as_ref())
    };
    let mixed = {
        let ab = linalg::mul(da.matrix().as_ref(), b.matrix().as_ref());
        let ba = linalg::mul(db.matrix().as_ref(), a.matrix().as_ref());
        Mat::from_fn(ab.nrows(), ab.ncols(), |i, j| ab[(i, j)] - ba[(i, j)])
    };
    let mut out = od(mixed);
    let od_a = od(da.into_matrix());
    let od_b = od(db.into_matrix());
    linalg::mul_into(out.as_mut(), od_b.as_ref(), a.matrix().as_ref(), true);
    let neg = Mat::from_fn(od_a.nrows(), od_a.ncols(), |i, j| -od_a[(i, j)]);
    linalg::mul_into(out.as_mut(), neg.as_ref(), b.matrix().as_ref(), true);
    Ok(out)
}

fn quadrature_correlation(
    h: &LatticeOperator,
    a: &LatticeOperator,
    b: &LatticeOperator,
    ext: &AlmostAnalyticExtension,
    s: &CalculusSettings,
) -> Result<Mat<c64>> {
    let n = h.dim();
    let da = commutator(h, a)?.into_matrix();
    let db = commutator(h, b)?.into_matrix();
    let hm = h.matrix().as_ref();
    // R dA R dB R - R dB R dA R = (PQ - QP) R with P = R dA, Q = R dB.
    let triple = |z: c64| {
        let r = resolvent(hm, z);
        let p = linalg::mul(r.as_ref(), da.as_ref());
        let q = linalg::mul(r.as_ref(), db.as_ref());
        let mut m = linalg::mul(p.as_ref(), q.as_ref());
        let qp = linalg::mul(q.as_ref(), p.as_ref());
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] -= qp[(i, j)];
            }
        }
        linalg::mul(m.as_ref(), r.as_ref())
    };
    let symmetric = a.is_hermitian() && b.is_hermitian();
    converge(ext, s.z_min, s.quad_panels, s.gl_order, s.quad_tol, s.max_refinements, |grid| {
        if symmetric {
            grid.integrate(n, -1.0, triple)
        } else {
            let mirrored = QuadratureGridBoth(grid);
            mirrored.integrate(n, triple)
        }
    })
}

fn quadrature_off_diagonal(
    h: &LatticeOperator,
    a: &LatticeOperator,
    ext: &AlmostAnalyticExtension,
    s: &CalculusSettings,
) -> Result<Mat<c64>> {
    let n = h.dim();
    let am = a.matrix();
    let hm = h.matrix().as_ref();
    let sandwich = |z: c64| {
        let r = resolvent(hm, z);
        linalg::mul(linalg::mul(r.as_ref(), am.as_ref()).as_ref(), r.as_ref())
    };
    converge(ext, s.z_min, s.quad_panels, s.gl_order, s.quad_tol, s.max_refinements, |grid| {
        if a.is_hermitian() {
            grid.integrate(n, 1.0, sandwich)
        } else {
            QuadratureGridBoth(grid).integrate(n, sandwich)
        }
    })
}

/// Evaluates upper and lower half-plane nodes explicitly.
struct QuadratureGridBoth<'a>(&'a super::QuadratureGrid);

impl QuadratureGridBoth<'_> {
    fn integrate(&self, n: usize, f: impl Fn(c64) -> Mat<c64>) -> Mat<c64> {
        let mut acc = Mat::<c64>::zeros(n, n);
        for node in &self.0.nodes {
            for (z, d) in [(node.z, node.dbar), (node.z.conj(), node.dbar.conj())] {
                let v = f(z);
                let c = d * node.weight * c64::new(0.0, 1.0);
                for j in 0..n {
                    for i in 0..n {
                        acc[(i, j)] += c * v[(i, j)];
                    }
                }
            }
        }
        acc
    }
}

fn check_inputs(h: &LatticeOperator, ops: &[&LatticeOperator]) -> Result<()> {
    if !h.is_hermitian() {
        bail!(Calculus, "the Hamiltonian must be hermitian");
    }
    for op in ops {
        if !crate::operator::same_geometry(h.sample(), op.sample()) {
            bail!(Calculus, "operators live on different samples");
        }
    }
    Ok(())
}

fn run_engine(
    s: &CalculusSettings,
    spectral: impl FnOnce() -> Result<Mat<c64>>,
    quadrature: impl FnOnce() -> Result<Mat<c64>>,
) -> Result<Mat<c64>> {
    match s.engine {
        Engine::Spectral => spectral(),
        Engine::Quadrature => quadrature(),
        Engine::CrossCheck => {
            let a = spectral()?;
            let b = quadrature()?;
            let diff = linalg::max_abs_diff(a.as_ref(), b.as_ref());
            if diff > s.cross_check_tol {
                bail!(Calculus, "engines disagree by {diff:e} (tolerance {:e})", s.cross_check_tol);
            }
            Ok(a)
        }
    }
}

/// `Σ^{A,B} = ∫ ∂ρ̃/∂z̄ [R A' R B' R - R B' R A' R] dm` with `A' = [H, A]`, `B' = [H, B]`.
pub fn correlation_operator(
    h: &LatticeOperator,
    a: &LatticeOperator,
    b: &LatticeOperator,
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
) -> Result<LatticeOperator> {
    check_inputs(h, &[a, b])?;
    let m = run_engine(
        settings,
        || spectral_correlation(h, a, b, ext.density(), settings.dd_cluster_eps),
        || quadrature_correlation(h, a, b, ext, settings),
    )?;
    Ok(LatticeOperator::general_unchecked(h.sample().clone(), m))
}

/// `A^OD = ∫ ∂ρ̃/∂z̄ R A R dm`, off-diagonal with respect to `P = ρ(H)`.
pub fn off_diagonal_part(
    h: &LatticeOperator,
    a: &LatticeOperator,
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
) -> Result<LatticeOperator> {
    check_inputs(h, &[a])?;
    let m = run_engine(
        settings,
        || spectral_off_diagonal(h, a, ext.density(), settings.dd_cluster_eps),
        || quadrature_off_diagonal(h, a, ext, settings),
    )?;
    Ok(LatticeOperator::general_unchecked(h.sample().clone(), m))
}

/// Reference evaluation `Σ̂_ac = πi Σ_b ρ[λ_a, λ_b, λ_c] (Â'_ab B̂'_bc - B̂'_ab Â'_bc)`.
///
/// Cubic in the number of terms per entry; meant for small checks.
pub fn correlation_triple_sum(
    h: &LatticeOperator,
    a: &LatticeOperator,
    b: &LatticeOperator,
    rho: &DensityFunction,
    eps: f64,
) -> Result<LatticeOperator> {
    check_inputs(h, &[a, b])?;
    let spec = SpectralData::new(h)?;
    let ah = spec.to_eigenbasis(commutator(h, a)?.matrix().as_ref());
    let bh = spec.to_eigenbasis(commutator(h, b)?.matrix().as_ref());
    let l = spec.values();
    let n = l.len();
    let mut out = Mat::<c64>::zeros(n, n);
    for c in 0..n {
        for a_ in 0..n {
            let mut acc = c64::new(0.0, 0.0);
            for b_ in 0..n {
                let dd = divided_difference_2(rho, l[a_], l[b_], l[c], eps);
                acc += (ah[(a_, b_)] * bh[(b_, c)] - bh[(a_, b_)] * ah[(b_, c)]) * dd;
            }
            out[(a_, c)] = acc * c64::new(0.0, PI);
        }
    }
    Ok(LatticeOperator::general_unchecked(h.sample().clone(), spec.from_eigenbasis(out.as_ref())))
}

/// Diagonal of `Σ^{A,B}` on selected states for diagonal `A = diag(a)`, `B = diag(b)`.
///
/// Returns exact zeros when `[H, A]` or `[H, B]` vanishes identically.
pub fn correlation_diagonal(
    spec: &SpectralData,
    h: &SparseOperator,
    a: &[f64],
    b: &[f64],
    rho: &DensityFunction,
    rows: &[usize],
    eps: f64,
) -> Vec<c64> {
    correlation_diagonals(spec, h, a, &[b], rho, rows, eps).pop().unwrap()
}

/// [`correlation_diagonal`] for several `B` sharing one `A`.
pub fn correlation_diagonals(
    spec: &SpectralData,
    h: &SparseOperator,
    a: &[f64],
    bs: &[&[f64]],
    rho: &DensityFunction,
    rows: &[usize],
    eps: f64,
) -> Vec<Vec<c64>> {
    let zeros = || vec![c64::new(0.0, 0.0); rows.len()];
    let da = h.commutator_with_diagonal(a);
    if da.nnz() == 0 {
        return bs.iter().map(|_| zeros()).collect();
    }
    let diag_of = |x: &SparseOperator| {
        let x_hat = spec.sparse_to_eigenbasis(x);
        let y = od_hat(spec, x_hat, rho, eps);
        spec.diagonal_from_eigenbasis(y.as_ref(), rows)
    };
    let d1 = diag_of(&da);
    bs.iter()
        .map(|b| {
            let db = h.commutator_with_diagonal(b);
            if db.nnz() == 0 {
                return zeros();
            }
            let mixed = h.map(|i, j, v| v * (a[j] * b[i] - a[i] * b[j]));
            let d3 = diag_of(&mixed);
            let d2 = diag_of(&db);
            rows.iter().enumerate().map(|(r, &k)| d3[r] - d1[r] * b[k] + d2[r] * a[k]).collect()
        })
        .collect()
}
