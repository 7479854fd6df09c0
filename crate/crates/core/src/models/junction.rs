use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{add_block, block_adjoint, common_gap, BulkModel, SpinBlock, ZERO_BLOCK};
use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::{LatticeSample, SiteKind, SPIN_DIM};
use crate::operator::{Hermiticity, LatticeOperator};

/// Random near-interface perturbation `H_δ`.
///
/// On-site and nearest-neighbour (`l1` distance ≤ 1) blocks `a I + i b·σ` with
/// `a, b` uniform in `[-1, 1]`, scaled by `amplitude · exp(-nu (|x1| + |y1|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaRule {
    pub amplitude: f64,
    pub nu: f64,
    pub seed: u64,
}

impl Default for DeltaRule {
    fn default() -> Self {
        Self { amplitude: 0.0, nu: 1.0, seed: 0 }
    }
}

/// Two bulk models glued along `x1 = 0`.
///
/// Hoppings that cross the interface between identical lattices use the average
/// of the two hopping rules. Between different lattices, and for defect sites,
/// sites at `l1` distance ≤ 1 are coupled by `bridge · I`.
#[derive(Debug, Clone)]
pub struct JunctionModel {
    pub left: BulkModel,
    pub right: BulkModel,
    pub half_width: f64,
    pub delta: DeltaRule,
    pub bridge: f64,
}

impl JunctionModel {
    pub fn new(left: BulkModel, right: BulkModel, half_width: f64) -> Self {
        Self { left, right, half_width, delta: DeltaRule::default(), bridge: 0.5 }
    }

    pub fn with_delta(mut self, delta: DeltaRule) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_bridge(mut self, bridge: f64) -> Self {
        self.bridge = bridge;
        self
    }

    pub fn spin_conserving(&self) -> bool {
        self.left.spin_conserving() && self.right.spin_conserving()
    }

    pub fn common_gap(&self, k_grid: usize) -> Result<[f64; 2]> {
        common_gap(&self.left, &self.right, k_grid)
    }

    fn validate(&self, sample: &LatticeSample) -> Result<()> {
        if sample.lattices() != [self.left.lattice().clone(), self.right.lattice().clone()] {
            bail!(Model, "sample was not built from the junction's left and right lattices");
        }
        if sample.interface_half_width() != Some(self.half_width) {
            bail!(Model, "sample interface half-width differs from the junction's L = {}", self.half_width);
        }
        let d = &self.delta;
        if !(d.amplitude >= 0.0 && d.nu > 0.0 && d.amplitude.is_finite() && d.nu.is_finite()) {
            bail!(Model, "delta rule needs amplitude >= 0 and nu > 0, got {} and {}", d.amplitude, d.nu);
        }
        if !self.bridge.is_finite() {
            bail!(Model, "bridge coupling must be finite");
        }
        Ok(())
    }
}

fn l1(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).abs() + (p[1] - q[1]).abs()
}

/// Pairs `i < j` at `l1` distance ≤ 1; relies on the sample ordering by `x1`.
fn near_pairs(sample: &LatticeSample) -> Vec<(usize, usize)> {
    let sites = sample.sites();
    let mut out = Vec::new();
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if sites[j].pos[0] - sites[i].pos[0] > 1.0 + 1e-9 {
                break;
            }
            if l1(sites[i].pos, sites[j].pos) <= 1.0 + 1e-9 {
                out.push((i, j));
            }
        }
    }
    out
}

fn set_pair(m: &mut Mat<c64>, to: usize, from: usize, block: &SpinBlock) {
    add_block(m, to, from, block);
    add_block(m, from, to, &block_adjoint(block));
}

fn scalar(x: f64) -> SpinBlock {
    let mut b = ZERO_BLOCK;
    b[0][0] = c64::new(x, 0.0);
    b[1][1] = c64::new(x, 0.0);
    b
}

fn average(a: Option<&SpinBlock>, b: Option<&SpinBlock>) -> SpinBlock {
    let (a, b) = (a.unwrap_or(&ZERO_BLOCK), b.unwrap_or(&ZERO_BLOCK));
    let mut out = ZERO_BLOCK;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = 0.5 * (a[i][j] + b[i][j]);
        }
    }
    out
}

/// Junction Hamiltonian without `H_δ`.
pub fn realize_junction_base(jm: &JunctionModel, sample: Arc<LatticeSample>) -> Result<LatticeOperator> {
    jm.validate(&sample)?;
    let n = sample.dim();
    let mut m = Mat::<c64>::zeros(n, n);
    let models = [&jm.left, &jm.right];
    let same_lattice = jm.left.lattice() == jm.right.lattice();
    for (i, site) in sample.sites().iter().enumerate() {
        let SiteKind::Lattice { lattice, cell, basis } = site.kind else { continue };
        for h in models[lattice].hoppings().filter(|h| h.from == basis) {
            let target = [cell[0] + h.disp[0], cell[1] + h.disp[1]];
            if let Some(j) = sample.index_of_cell(lattice, target, h.to) {
                add_block(&mut m, j, i, &h.block);
            }
        }
        if same_lattice && lattice == 0 {
            // Left-to-right hoppings, once per pair; the adjoint covers right-to-left.
            let mut keys: Vec<([i64; 2], usize)> = models
                .iter()
                .flat_map(|md| md.hoppings().filter(|h| h.from == basis).map(|h| (h.disp, h.to)))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            for (d, to) in keys {
                let target = [cell[0] + d[0], cell[1] + d[1]];
                if let Some(j) = sample.index_of_cell(1, target, to) {
                    let block = average(jm.left.hopping(d, basis, to), jm.right.hopping(d, basis, to));
                    set_pair(&mut m, j, i, &block);
                }
            }
        }
    }
    let sites = sample.sites();
    for (i, j) in near_pairs(&sample) {
        let bridged = match (sites[i].kind, sites[j].kind) {
            (SiteKind::Defect, _) | (_, SiteKind::Defect) => true,
            (SiteKind::Lattice { lattice: a, .. }, SiteKind::Lattice { lattice: b, .. }) => a != b && !same_lattice,
        };
        if bridged {
            set_pair(&mut m, j, i, &scalar(jm.bridge));
        }
    }
    LatticeOperator::new(sample, m, Hermiticity::Hermitian)
}

/// The perturbation `H_δ` on a junction sample.
pub fn realize_delta(jm: &JunctionModel, sample: Arc<LatticeSample>) -> Result<LatticeOperator> {
    jm.validate(&sample)?;
    let d = jm.delta;
    let n = sample.dim();
    let mut m = Mat::<c64>::zeros(n, n);
    if d.amplitude == 0.0 {
        return LatticeOperator::new(sample, m, Hermiticity::Hermitian);
    }
    let conserve = jm.spin_conserving();
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    let mut draw = |onsite: bool| -> SpinBlock {
        let a: f64 = rng.random_range(-1.0..=1.0);
        let mut b = [0.0; 3];
        for v in &mut b {
            *v = rng.random_range(-1.0..=1.0);
        }
        if onsite {
            return scalar(a);
        }
        if conserve {
            b[0] = 0.0;
            b[1] = 0.0;
        }
        // a I + i (b_x σ_x + b_y σ_y + b_z σ_z)
        [[c64::new(a, b[2]), c64::new(b[1], b[0])], [c64::new(-b[1], b[0]), c64::new(a, -b[2])]]
    };
    let sites = sample.sites();
    let envelope = |i: usize, j: usize| d.amplitude * (-d.nu * (sites[i].pos[0].abs() + sites[j].pos[0].abs())).exp();
    for i in 0..sites.len() {
        let block = draw(true);
        let e = envelope(i, i);
        add_block(&mut m, i, i, &block.map(|r| r.map(|v| v * e)));
    }
    for (i, j) in near_pairs(&sample) {
        let block = draw(false);
        let e = envelope(i, j);
        set_pair(&mut m, j, i, &block.map(|r| r.map(|v| v * e)));
    }
    let out = LatticeOperator::new(sample, m, Hermiticity::Hermitian)?;
    let c = delta_envelope_constant(&out, d.nu);
    if c > 2.0 * d.amplitude * (1.0 + 1e-12) {
        bail!(Model, "perturbation envelope constant {c} exceeds 2 x amplitude");
    }
    Ok(out)
}

/// Smallest `C` with `|A(x, y)| ≤ C exp(-nu (|x1| + |y1|))` entrywise.
pub fn delta_envelope_constant(a: &LatticeOperator, nu: f64) -> f64 {
    let sample = a.sample();
    let m = a.matrix();
    let mut c: f64 = 0.0;
    for col in 0..a.dim() {
        let y = sample.site(col / SPIN_DIM).pos[0].abs();
        for row in 0..a.dim() {
            let v = m[(row, col)].norm();
            if v > 0.0 {
                let x = sample.site(row / SPIN_DIM).pos[0].abs();
                c = c.max(v * (nu * (x + y)).exp());
            }
        }
    }
    c
}

/// `H_e`: left and right bulk with their interface coupling, plus `H_δ`.
pub fn realize_junction(jm: &JunctionModel, sample: Arc<LatticeSample>) -> Result<LatticeOperator> {
    let base = realize_junction_base(jm, sample.clone())?;
    let delta = realize_delta(jm, sample)?;
    base.combine(c64::new(1.0, 0.0), &delta, c64::new(1.0, 0.0))
}
