use std::f64::consts::TAU;

use faer::Mat;
use serde::Serialize;

use crate::c64;
use crate::error::{bail, Result};
use crate::linalg;
use crate::models::{BlochHamiltonian, BulkModel, SpinSector};

/// Integer Chern number of the lowest bands from plaquette field strengths.
#[derive(Debug, Clone, Serialize)]
pub struct ChernResult {
    pub value: i64,
    /// Sum of plaquette phases over `2π` before rounding.
    pub raw: f64,
    pub sector: SpinSector,
    pub bands: usize,
    pub grid: usize,
    /// Smallest separation between the selected bands and the rest on the grid.
    pub min_gap: f64,
}

fn link(a: &Mat<c64>, b: &Mat<c64>) -> c64 {
    let overlap = crate::linalg::mul(a.adjoint(), b.as_ref());
    let d = determinant(overlap);
    if d.norm() == 0.0 {
        c64::new(1.0, 0.0)
    } else {
        d / d.norm()
    }
}

fn determinant(mut m: Mat<c64>) -> c64 {
    let n = m.nrows();
    let mut det = c64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].norm().total_cmp(&m[(j, c)].norm())).unwrap();
        if m[(p, c)].norm() == 0.0 {
            return c64::new(0.0, 0.0);
        }
        if p != c {
            for j in 0..n {
                let t = m[(p, j)];
                m[(p, j)] = m[(c, j)];
                m[(c, j)] = t;
            }
            det = -det;
        }
        let piv = m[(c, c)];
        det *= piv;
        for i in c + 1..n {
            let f = m[(i, c)] / piv;
            for j in c..n {
                let v = m[(c, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    det
}

/// Chern number of the lowest `bands` bands (default: half) on an `n × n` grid.
///
/// Oriented so that it agrees with the real-space `2πi Tr(P[[P, Λ1], [P, Λ2]])`.
pub fn chern_k_space(model: &BulkModel, sector: SpinSector, bands: Option<usize>, n: usize) -> Result<ChernResult> {
    let h = BlochHamiltonian::sector(model, sector)?;
    let dim = h.dim();
    let bands = bands.unwrap_or(dim / 2);
    if bands == 0 || bands >= dim {
        bail!(Conductance, "band selection {bands} out of {dim} leaves no gap");
    }
    if n < 2 {
        bail!(Conductance, "k-grid must be at least 2 x 2");
    }
    let step = TAU / n as f64;
    let mut frames = Vec::with_capacity(n * n);
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let (e, v) = h.eigen([i as f64 * step, j as f64 * step])?;
            min_gap = min_gap.min(e[bands] - e[bands - 1]);
            frames.push(Mat::from_fn(dim, bands, |r, c| v[(r, c)]));
        }
    }
    if min_gap < 1e-8 {
        bail!(Conductance, "selected bands touch the rest on the grid (gap {min_gap:e})");
    }
    let at = |i: usize, j: usize| &frames[(i % n) * n + (j % n)];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u1 = link(at(i, j), at(i + 1, j));
            let u2 = link(at(i + 1, j), at(i + 1, j + 1));
            let u3 = link(at(i, j + 1), at(i + 1, j + 1));
            let u4 = link(at(i, j), at(i, j + 1));
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    let raw = total / TAU;
    Ok(ChernResult { value: raw.round() as i64, raw, sector, bands, grid: n, min_gap })
}

/// `Tr(1_rows P [[P, X], [P, Y]])` for diagonal `X = diag(x)`, `Y = diag(y)`.
pub fn double_commutator_trace(p: &Mat<c64>, x: &[f64], y: &[f64], rows: &[usize]) -> c64 {
    let n = p.nrows();
    let comm = |d: &[f64]| Mat::from_fn(n, n, |i, j| p[(i, j)] * (d[j] - d[i]));
    let (cx, cy) = (comm(x), comm(y));
    let pr = Mat::from_fn(rows.len(), n, |r, j| p[(rows[r], j)]);
    let px = linalg::mul(pr.as_ref(), cx.as_ref());
    let py = linalg::mul(pr.as_ref(), cy.as_ref());
    let mut acc = c64::new(0.0, 0.0);
    for (r, &k) in rows.iter().enumerate() {
        for j in 0..n {
            acc += px[(r, j)] * cy[(j, k)] - py[(r, j)] * cx[(j, k)];
        }
    }
    acc
}
