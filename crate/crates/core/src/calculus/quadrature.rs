use faer::{Mat, MatRef};

use super::extension::{CUTOFF_INNER, CUTOFF_OUTER};
use super::AlmostAnalyticExtension;
use crate::c64;
use crate::error::{bail, Result};
use crate::linalg;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Node `z` in the upper half-plane with Lebesgue weight and `∂ρ̃/∂z̄(z)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub z: c64,
    pub weight: f64,
    pub dbar: c64,
}

/// Tensor Gauss–Legendre grid over the upper half of `supp ∂ρ̃/∂z̄`.
///
/// Lower half-plane contributions are recovered by conjugation symmetry.
/// The strip `0 < Im z < z_min` is excluded.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<QuadNode>,
    pub level: usize,
    pub z_min: f64,
}

fn split(breaks: &[f64], parts: usize) -> Vec<[f64; 2]> {
    breaks
        .windows(2)
        .flat_map(|w| {
            let h = (w[1] - w[0]) / parts as f64;
            (0..parts).map(move |k| [w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h])
        })
        .collect()
}

impl QuadratureGrid {
    /// Grid at refinement `level`; each level halves every panel.
    pub fn new(
        ext: &AlmostAnalyticExtension,
        z_min: f64,
        panels: usize,
        gl_order: usize,
        level: usize,
    ) -> Result<Self> {
        if !(z_min > 0.0 && z_min < CUTOFF_INNER) {
            bail!(Calculus, "z_min must lie in (0, {CUTOFF_INNER}), got {z_min}");
        }
        let rho = ext.density();
        let [l0, l1] = rho.lower_ramp();
        let [u0, u1] = rho.transition();
        let refine = 1usize << level;
        let (gx, gw) = gauss_legendre(gl_order);

        let mut low_y = vec![z_min];
        let mut y = CUTOFF_INNER;
        let mut grades = Vec::new();
        while y / 4.0 > z_min {
            y /= 4.0;
            grades.push(y);
        }
        low_y.extend(grades.iter().rev());
        low_y.push(CUTOFF_INNER);
        let y_low = split(&low_y, refine);
        let y_high = split(&[CUTOFF_INNER, CUTOFF_OUTER], 2 * refine);

        let ramps: Vec<[f64; 2]> =
            split(&[l0, l1], panels * refine).into_iter().chain(split(&[u0, u1], panels * refine)).collect();
        let plateau_parts = ((u0 - l1).max(0.0).ceil() as usize).max(1) * refine;
        let plateau = if u0 > l1 { split(&[l1, u0], plateau_parts) } else { Vec::new() };

        let mut nodes = Vec::new();
        let mut push_panel = |xs: [f64; 2], ys: [f64; 2]| {
            let (hx, hy) = (0.5 * (xs[1] - xs[0]), 0.5 * (ys[1] - ys[0]));
            for (a, wa) in gx.iter().zip(&gw) {
                let x = xs[0] + hx * (a + 1.0);
                for (b, wb) in gx.iter().zip(&gw) {
                    let y = ys[0] + hy * (b + 1.0);
                    let z = c64::new(x, y);
                    let dbar = ext.dbar(z);
                    if dbar != c64::new(0.0, 0.0) {
                        nodes.push(QuadNode { z, weight: wa * wb * hx * hy, dbar });
                    }
                }
            }
        };
        for xs in &ramps {
            for ys in y_low.iter().chain(&y_high) {
                push_panel(*xs, *ys);
            }
        }
        for xs in &plateau {
            for ys in &y_high {
                push_panel(*xs, *ys);
            }
        }
        Ok(Self { nodes, level, z_min })
    }

    /// `∫ ∂ρ̃/∂z̄ f(z) dm(z)` with `dm = i dx dy`, given `f(z̄) = s f(z)^†`.
    ///
    /// `sign` is `+1` when `f(z̄) = f(z)^†` and `-1` when `f(z̄) = -f(z)^†`.
    pub fn integrate(&self, n: usize, sign: f64, f: impl Fn(c64) -> Mat<c64>) -> Mat<c64> {
        let mut acc = Mat::<c64>::zeros(n, n);
        for node in &self.nodes {
            let v = f(node.z);
            let c = node.dbar * node.weight * c64::new(0.0, 1.0);
            let cc = node.dbar.conj() * node.weight * c64::new(0.0, 1.0) * sign;
            for j in 0..n {
                for i in 0..n {
                    acc[(i, j)] += c * v[(i, j)] + cc * v[(j, i)].conj();
                }
            }
        }
        acc
    }
}

/// Repeats `eval` on refined grids until the error estimate of the finest
/// level drops below `tol`.
///
/// The difference `r_k` of two successive levels bounds the error of the
/// coarser one. Once the differences contract, `r_k · r_k / r_{k-1}` estimates
/// the error of the finer level, which saves the last (most expensive) grid.
pub(crate) fn converge(
    ext: &AlmostAnalyticExtension,
    z_min: f64,
    panels: usize,
    gl_order: usize,
    tol: f64,
    max_refinements: usize,
    eval: impl Fn(&QuadratureGrid) -> Mat<c64>,
) -> Result<Mat<c64>> {
    let mut prev = eval(&QuadratureGrid::new(ext, z_min, panels, gl_order, 0)?);
    let mut last = f64::INFINITY;
    let mut estimate = f64::INFINITY;
    for level in 1..=max_refinements {
        let next = eval(&QuadratureGrid::new(ext, z_min, panels, gl_order, level)?);
        let scale = linalg::max_abs(next.as_ref()).max(1.0);
        let residual = linalg::max_abs_diff(prev.as_ref(), next.as_ref()) / scale;
        estimate = if last.is_finite() { residual * (residual / last).min(1.0) } else { residual };
        if estimate <= tol {
            return Ok(next);
        }
        last = residual;
        prev = next;
    }
    bail!(Calculus, "quadrature not converged after {max_refinements} refinements (error estimate {estimate:e})")
}

/// Resolvent `(H - z)^{-1}`.
pub(crate) fn resolvent(h: MatRef<'_, c64>, z: c64) -> Mat<c64> {
    let n = h.nrows();
    let shifted = Mat::from_fn(n, n, |i, j| if i == j { h[(i, j)] - z } else { h[(i, j)] });
    linalg::inverse(shifted.as_ref())
}

/// `ρ(H) = (1/πi) ∫ ∂ρ̃/∂z̄ (H - z)^{-1} dm` by quadrature.
pub fn hs_apply(
    h: MatRef<'_, c64>,
    ext: &AlmostAnalyticExtension,
    z_min: f64,
    panels: usize,
    gl_order: usize,
    tol: f64,
) -> Result<Mat<c64>> {
    let n = h.nrows();
    let integral = converge(ext, z_min, panels, gl_order, tol, 4, |grid| grid.integrate(n, 1.0, |z| resolvent(h, z)))?;
    let scale = c64::new(0.0, -1.0 / std::f64::consts::PI);
    Ok(Mat::from_fn(n, n, |i, j| integral[(i, j)] * scale))
}
