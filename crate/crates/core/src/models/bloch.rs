use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{add_block, BulkModel};
use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::SPIN_DIM;
use crate::linalg::hermitian_eigen;

/// Spin block of a Bloch Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinSector {
    Full,
    Up,
    Down,
}

/// `H(k) = Σ_d e^{i k·d} T(d)` in the cell-periodic gauge, `k` in reduced units `[0, 2π)²`.
#[derive(Debug, Clone)]
pub struct BlochHamiltonian<'a> {
    model: &'a BulkModel,
    sector: SpinSector,
}

impl<'a> BlochHamiltonian<'a> {
    pub fn new(model: &'a BulkModel) -> Self {
        Self { model, sector: SpinSector::Full }
    }

    /// Restriction to one spin sector; requires a spin-conserving model.
    pub fn sector(model: &'a BulkModel, sector: SpinSector) -> Result<Self> {
        if sector != SpinSector::Full && !model.spin_conserving() {
            bail!(Model, "model '{}' does not conserve spin; sectors are undefined", model.name());
        }
        Ok(Self { model, sector })
    }

    pub fn dim(&self) -> usize {
        match self.sector {
            SpinSector::Full => self.model.band_count(),
            _ => self.model.lattice().basis.len(),
        }
    }

    pub fn matrix(&self, k: [f64; 2]) -> Mat<c64> {
        let nb = self.model.lattice().basis.len();
        let mut full = Mat::<c64>::zeros(SPIN_DIM * nb, SPIN_DIM * nb);
        for h in self.model.hoppings() {
            let phase = c64::from_polar(1.0, k[0] * h.disp[0] as f64 + k[1] * h.disp[1] as f64);
            let block = h.block.map(|row| row.map(|v| v * phase));
            add_block(&mut full, h.to, h.from, &block);
        }
        let s = match self.sector {
            SpinSector::Full => return full,
            SpinSector::Up => 0,
            SpinSector::Down => 1,
        };
        Mat::from_fn(nb, nb, |i, j| full[(SPIN_DIM * i + s, SPIN_DIM * j + s)])
    }

    pub fn eigen(&self, k: [f64; 2]) -> Result<(Vec<f64>, Mat<c64>)> {
        hermitian_eigen(self.matrix(k).as_ref())
    }
}

fn k_grid(n: usize) -> impl Iterator<Item = [f64; 2]> {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).flat_map(move |i| (0..n).map(move |j| [i as f64 * step, j as f64 * step]))
}

/// Gap `[top of band filling-1, bottom of band filling]` sampled on an `n × n` k-grid.
///
/// `filling` defaults to half the bands.
pub fn band_gap(model: &BulkModel, n: usize, filling: Option<usize>) -> Result<[f64; 2]> {
    let bands = model.band_count();
    let fill = filling.unwrap_or(bands / 2);
    if fill == 0 || fill >= bands {
        bail!(Model, "filling {fill} leaves no gap among {bands} bands");
    }
    let h = BlochHamiltonian::new(model);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in k_grid(n) {
        let (e, _) = h.eigen(k)?;
        lo = lo.max(e[fill - 1]);
        hi = hi.min(e[fill]);
    }
    if lo >= hi {
        bail!(Model, "model '{}' has no gap at filling {fill} (bands overlap on [{hi}, {lo}])", model.name());
    }
    Ok([lo, hi])
}

/// Overlap of the half-filling gaps of two models.
pub fn common_gap(a: &BulkModel, b: &BulkModel, n: usize) -> Result<[f64; 2]> {
    let (ga, gb) = (band_gap(a, n, None)?, band_gap(b, n, None)?);
    let g = [ga[0].max(gb[0]), ga[1].min(gb[1])];
    if g[0] >= g[1] {
        bail!(Model, "gaps {ga:?} of '{}' and {gb:?} of '{}' do not overlap", a.name(), b.name());
    }
    Ok(g)
}

/// Lowest and highest band energy over an `n × n` k-grid.
pub fn spectrum_bounds(model: &BulkModel, n: usize) -> Result<[f64; 2]> {
    let h = BlochHamiltonian::new(model);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in k_grid(n) {
        let (e, _) = h.eigen(k)?;
        lo = lo.min(e[0]);
        hi = hi.max(e[e.len() - 1]);
    }
    Ok([lo, hi])
}
