//! Tight-binding models: bulk hopping rules, Bloch Hamiltonians, presets and junctions.

mod bloch;
mod junction;
mod presets;

use std::collections::BTreeMap;
use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::{LatticeSample, LatticeSpec, SiteKind, SPIN_DIM};
use crate::operator::LatticeOperator;

pub use bloch::{band_gap, common_gap, spectrum_bounds, BlochHamiltonian, SpinSector};
pub use junction::{
    delta_envelope_constant, realize_delta, realize_junction, realize_junction_base, DeltaRule, JunctionModel,
};
pub use presets::{
    atomic_insulator, bhz, honeycomb_lattice, kane_mele, spinful_haldane, two_orbital_lattice, ModelSpec,
};

/// 2x2 block acting on the spin components.
pub type SpinBlock = [[c64; 2]; 2];

pub const ZERO_BLOCK: SpinBlock = [[c64 { re: 0.0, im: 0.0 }; 2]; 2];

pub fn block_adjoint(b: &SpinBlock) -> SpinBlock {
    [[b[0][0].conj(), b[1][0].conj()], [b[0][1].conj(), b[1][1].conj()]]
}

fn block_close(a: &SpinBlock, b: &SpinBlock, tol: f64) -> bool {
    (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
}

/// Time reversal `σ_y B̄ σ_y`.
fn block_time_reversed(b: &SpinBlock) -> SpinBlock {
    [[b[1][1].conj(), -b[1][0].conj()], [-b[0][1].conj(), b[0][0].conj()]]
}

/// Amplitude for `H[(R + disp, to), (R, from)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hopping {
    pub disp: [i64; 2],
    pub from: usize,
    pub to: usize,
    pub block: SpinBlock,
}

/// Translation-invariant finite-range hopping rule on a lattice.
#[derive(Debug, Clone, Serialize)]
pub struct BulkModel {
    name: String,
    #[serde(skip)]
    lattice: LatticeSpec,
    #[serde(skip)]
    hoppings: BTreeMap<([i64; 2], usize, usize), SpinBlock>,
    params: BTreeMap<String, f64>,
    spin_conserving: bool,
    time_reversal_symmetric: bool,
    max_range: f64,
}

/// Accumulates hopping terms; each term is added together with its hermitian partner.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    name: String,
    lattice: LatticeSpec,
    hoppings: BTreeMap<([i64; 2], usize, usize), SpinBlock>,
    params: BTreeMap<String, f64>,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>, lattice: LatticeSpec) -> Self {
        Self { name: name.into(), lattice, hoppings: BTreeMap::new(), params: BTreeMap::new() }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn add_raw(&mut self, disp: [i64; 2], from: usize, to: usize, block: &SpinBlock) {
        let e = self.hoppings.entry((disp, from, to)).or_insert(ZERO_BLOCK);
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] += block[i][j];
            }
        }
    }

    /// Adds `block` from `(R, from)` to `(R + disp, to)` and its adjoint on the way back.
    ///
    /// On-site terms (`disp = 0`, `from = to`) are added once and must be hermitian.
    pub fn hop(mut self, disp: [i64; 2], from: usize, to: usize, block: SpinBlock) -> Self {
        if disp == [0, 0] && from == to {
            self.add_raw(disp, from, to, &block);
        } else {
            self.add_raw(disp, from, to, &block);
            self.add_raw([-disp[0], -disp[1]], to, from, &block_adjoint(&block));
        }
        self
    }

    pub fn onsite(self, site: usize, block: SpinBlock) -> Self {
        self.hop([0, 0], site, site, block)
    }

    pub fn build(self) -> Result<BulkModel> {
        self.lattice.validate()?;
        let nb = self.lattice.basis.len();
        let mut hoppings = self.hoppings;
        hoppings.retain(|_, b| *b != ZERO_BLOCK);
        let mut spin_conserving = true;
        let mut tr = true;
        let mut max_range: f64 = 0.0;
        for (&(d, from, to), b) in &hoppings {
            if from >= nb || to >= nb {
                bail!(Model, "hopping references basis site {} but the lattice has {nb}", from.max(to));
            }
            let back = hoppings.get(&([-d[0], -d[1]], to, from));
            if !back.is_some_and(|p| block_close(p, &block_adjoint(b), 1e-12)) {
                bail!(Model, "hopping rule is not hermitian at displacement {d:?} ({from} -> {to})");
            }
            spin_conserving &= b[0][1] == c64::new(0.0, 0.0) && b[1][0] == c64::new(0.0, 0.0);
            tr &= block_close(&block_time_reversed(b), b, 1e-12);
            let p = self.lattice.position(d, to);
            let q = self.lattice.position([0, 0], from);
            max_range = max_range.max((p[0] - q[0]).abs() + (p[1] - q[1]).abs());
        }
        Ok(BulkModel {
            name: self.name,
            lattice: self.lattice,
            hoppings,
            params: self.params,
            spin_conserving,
            time_reversal_symmetric: tr,
            max_range,
        })
    }
}

impl BulkModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Whether every hopping block commutes with `σ_z`.
    pub fn spin_conserving(&self) -> bool {
        self.spin_conserving
    }

    pub fn time_reversal_symmetric(&self) -> bool {
        self.time_reversal_symmetric
    }

    /// Largest `l1` distance covered by a hopping.
    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    /// Number of bands, `SPIN_DIM * basis`.
    pub fn band_count(&self) -> usize {
        SPIN_DIM * self.lattice.basis.len()
    }

    pub fn hoppings(&self) -> impl Iterator<Item = Hopping> + '_ {
        self.hoppings.iter().map(|(&(disp, from, to), &block)| Hopping { disp, from, to, block })
    }

    pub fn hopping(&self, disp: [i64; 2], from: usize, to: usize) -> Option<&SpinBlock> {
        self.hoppings.get(&(disp, from, to))
    }

    /// Row-sum bound on the spectrum.
    pub fn norm_bound(&self) -> f64 {
        let nb = self.lattice.basis.len();
        let mut best: f64 = 0.0;
        for from in 0..nb {
            let mut row = 0.0;
            for h in self.hoppings().filter(|h| h.from == from) {
                row += h.block.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max) * 2.0;
            }
            best = best.max(row);
        }
        best
    }
}

pub(crate) fn set_block(m: &mut Mat<c64>, target: usize, source: usize, block: &SpinBlock) {
    for s in 0..SPIN_DIM {
        for t in 0..SPIN_DIM {
            m[(SPIN_DIM * target + s, SPIN_DIM * source + t)] = block[s][t];
        }
    }
}

pub(crate) fn add_block(m: &mut Mat<c64>, target: usize, source: usize, block: &SpinBlock) {
    for s in 0..SPIN_DIM {
        for t in 0..SPIN_DIM {
            m[(SPIN_DIM * target + s, SPIN_DIM * source + t)] += block[s][t];
        }
    }
}

/// Restriction of the hopping rule to a sample built on the model's lattice.
///
/// Uses lattice index `0` of the sample; hoppings leaving the sample are dropped.
pub fn realize_bulk(model: &BulkModel, sample: Arc<LatticeSample>) -> Result<LatticeOperator> {
    if sample.lattices().first() != Some(&model.lattice) {
        bail!(Model, "sample was not built on the lattice of model '{}'", model.name);
    }
    let n = sample.dim();
    let mut m = Mat::<c64>::zeros(n, n);
    for (i, site) in sample.sites().iter().enumerate() {
        let SiteKind::Lattice { lattice: 0, cell, basis } = site.kind else { continue };
        for h in model.hoppings().filter(|h| h.from == basis) {
            let target = [cell[0] + h.disp[0], cell[1] + h.disp[1]];
            if let Some(j) = sample.index_of_cell(0, target, h.to) {
                set_block(&mut m, j, i, &h.block);
            }
        }
    }
    LatticeOperator::new(sample, m, crate::operator::Hermiticity::Hermitian)
}
