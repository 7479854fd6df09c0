//! Lattices, finite samples and the regions and switch functions defined on them.

mod region;
mod switch;

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

pub use region::{centered_region, core_region, half_plane_region, strip_region, Region, RegionKind};
pub use switch::{evaluate_switch, Axis, SwitchKind, SwitchProfile};

/// Internal spin components per site.
pub const SPIN_DIM: usize = 2;

const KEY_SCALE: f64 = 1e6;

/// Rectangular Bravais lattice `a1 Z x a2 Z` with a finite basis.
///
/// Basis offsets are fractional coordinates in `[0, 1)^2` of the unit cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub a1: u32,
    pub a2: u32,
    pub basis: Vec<[f64; 2]>,
}

impl LatticeSpec {
    pub fn new(a1: u32, a2: u32, basis: Vec<[f64; 2]>) -> Result<Self> {
        let spec = Self { a1, a2, basis };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-site square lattice with unit pitch.
    pub fn square() -> Self {
        Self { a1: 1, a2: 1, basis: vec![[0.0, 0.0]] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a1 == 0 || self.a2 == 0 {
            bail!(Geometry, "lattice pitches must be positive, got ({}, {})", self.a1, self.a2);
        }
        if self.basis.is_empty() {
            bail!(Geometry, "lattice basis is empty");
        }
        for (i, b) in self.basis.iter().enumerate() {
            if !(0.0..1.0).contains(&b[0]) || !(0.0..1.0).contains(&b[1]) {
                bail!(Geometry, "basis offset {i} = {b:?} is outside the unit cell");
            }
            for (j, c) in self.basis.iter().enumerate().take(i) {
                if (b[0] - c[0]).abs() < 1e-9 && (b[1] - c[1]).abs() < 1e-9 {
                    bail!(Geometry, "basis offsets {j} and {i} coincide");
                }
            }
        }
        Ok(())
    }

    pub fn position(&self, cell: [i64; 2], basis: usize) -> [f64; 2] {
        let off = self.basis[basis];
        [(cell[0] as f64 + off[0]) * self.a1 as f64, (cell[1] as f64 + off[1]) * self.a2 as f64]
    }
}

/// What a sample site came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteKind {
    /// Site of lattice `lattice` (index into [`LatticeSample::lattices`]).
    Lattice { lattice: usize, cell: [i64; 2], basis: usize },
    /// Site added by a defect realization.
    Defect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub pos: [f64; 2],
    pub kind: SiteKind,
}

/// Finite set of sites, ordered lexicographically by `(x1, x2, lattice, basis)`.
///
/// Operators on a sample act on `C^(SPIN_DIM * len)`; state `SPIN_DIM * i + s`
/// is spin component `s` of site `i`.
#[derive(Debug, Clone)]
pub struct LatticeSample {
    sites: Vec<Site>,
    lattices: Vec<LatticeSpec>,
    extent: [f64; 2],
    interface_half_width: Option<f64>,
    by_position: HashMap<[i64; 2], usize>,
    by_cell: HashMap<(usize, [i64; 2], usize), usize>,
}

impl PartialEq for LatticeSample {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites && self.lattices == other.lattices && self.extent == other.extent
    }
}

fn key(pos: [f64; 2]) -> [i64; 2] {
    [(pos[0] * KEY_SCALE).round() as i64, (pos[1] * KEY_SCALE).round() as i64]
}

impl LatticeSample {
    fn from_sites(
        mut sites: Vec<Site>,
        lattices: Vec<LatticeSpec>,
        extent: [f64; 2],
        interface_half_width: Option<f64>,
    ) -> Result<Self> {
        sites.sort_by(|a, b| {
            let rank = |s: &Site| match s.kind {
                SiteKind::Lattice { lattice, basis, .. } => (lattice, basis),
                SiteKind::Defect => (usize::MAX, 0),
            };
            a.pos[0].total_cmp(&b.pos[0]).then(a.pos[1].total_cmp(&b.pos[1])).then(rank(a).cmp(&rank(b)))
        });
        let mut by_position = HashMap::with_capacity(sites.len());
        let mut by_cell = HashMap::with_capacity(sites.len());
        for (i, s) in sites.iter().enumerate() {
            if by_position.insert(key(s.pos), i).is_some() {
                bail!(Geometry, "two sites share position {:?}", s.pos);
            }
            if let SiteKind::Lattice { lattice, cell, basis } = s.kind {
                by_cell.insert((lattice, cell, basis), i);
            }
        }
        Ok(Self { sites, lattices, extent, interface_half_width, by_position, by_cell })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Dimension of the state space, `SPIN_DIM * len()`.
    pub fn dim(&self) -> usize {
        SPIN_DIM * self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn lattices(&self) -> &[LatticeSpec] {
        &self.lattices
    }

    /// Half-widths `(E1, E2)` of the sampling box.
    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    /// Half-width `L` of the defect strip for junction samples.
    pub fn interface_half_width(&self) -> Option<f64> {
        self.interface_half_width
    }

    pub fn index_of(&self, pos: [f64; 2]) -> Option<usize> {
        self.by_position.get(&key(pos)).copied()
    }

    pub fn index_of_cell(&self, lattice: usize, cell: [i64; 2], basis: usize) -> Option<usize> {
        self.by_cell.get(&(lattice, cell, basis)).copied()
    }

    /// Site values expanded to one entry per state.
    pub fn expand<T: Copy>(&self, per_site: &[T]) -> Vec<T> {
        per_site.iter().flat_map(|&v| std::iter::repeat_n(v, SPIN_DIM)).collect()
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

fn cell_range(extent: f64, pitch: u32) -> std::ops::RangeInclusive<i64> {
    let p = pitch as f64;
    let lo = (-extent / p - 1e-9).ceil() as i64;
    let hi = (extent / p + 1e-9).floor() as i64;
    lo..=hi
}

fn lattice_sites(spec: &LatticeSpec, lattice: usize, extent: [f64; 2]) -> Vec<Site> {
    let mut sites = Vec::new();
    for n1 in cell_range(extent[0], spec.a1) {
        for n2 in cell_range(extent[1], spec.a2) {
            for b in 0..spec.basis.len() {
                let cell = [n1, n2];
                sites.push(Site { pos: spec.position(cell, b), kind: SiteKind::Lattice { lattice, cell, basis: b } });
            }
        }
    }
    sites
}

fn check_extent(extent: [f64; 2]) -> Result<()> {
    if !(extent[0] > 0.0 && extent[1] > 0.0) || !extent.iter().all(|e| e.is_finite()) {
        bail!(Geometry, "sample extent must be positive, got {extent:?}");
    }
    Ok(())
}

/// All sites of cells whose origin lies in `[-E1, E1] x [-E2, E2]`.
pub fn build_bulk_sample(spec: &LatticeSpec, extent: [f64; 2]) -> Result<LatticeSample> {
    spec.validate()?;
    check_extent(extent)?;
    let sites = lattice_sites(spec, 0, extent);
    LatticeSample::from_sites(sites, vec![spec.clone()], extent, None)
}

/// Seeded site removals and additions inside the interface strip `|x1| <= L`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectSpec {
    pub seed: u64,
    /// Number of randomly chosen sites to remove.
    pub remove: usize,
    /// Number of sites to add at random free half-integer positions.
    pub add: usize,
    pub remove_at: Vec<[f64; 2]>,
    pub add_at: Vec<[f64; 2]>,
}

/// Junction sample: `left` for `x1 < 0`, `right` for `x1 >= 0`, defects in `|x1| <= L`.
///
/// Lattice index `0` is the left lattice and `1` the right lattice.
pub fn build_junction_sample(
    left: &LatticeSpec,
    right: &LatticeSpec,
    extent: [f64; 2],
    half_width: f64,
    defects: &DefectSpec,
) -> Result<LatticeSample> {
    left.validate()?;
    right.validate()?;
    check_extent(extent)?;
    if !(half_width >= 0.0) {
        bail!(Geometry, "interface half-width must be non-negative, got {half_width}");
    }
    let mut sites: Vec<Site> = lattice_sites(left, 0, extent)
        .into_iter()
        .filter(|s| s.pos[0] < 0.0)
        .chain(lattice_sites(right, 1, extent).into_iter().filter(|s| s.pos[0] >= 0.0))
        .collect();
    let inside = |p: [f64; 2]| p[0].abs() <= half_width + 1e-12;
    let in_box = |p: [f64; 2]| p[0].abs() <= extent[0] + 1e-12 && p[1].abs() <= extent[1] + 1e-12;
    for p in defects.remove_at.iter().chain(&defects.add_at) {
        if !inside(*p) {
            bail!(Geometry, "defect at {p:?} lies outside |x1| <= {half_width}");
        }
    }
    for p in &defects.remove_at {
        let k = key(*p);
        let before = sites.len();
        sites.retain(|s| key(s.pos) != k);
        if sites.len() == before {
            bail!(Geometry, "no site to remove at {p:?}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(defects.seed);
    if defects.remove > 0 {
        let mut candidates: Vec<usize> = (0..sites.len()).filter(|&i| inside(sites[i].pos)).collect();
        if candidates.len() < defects.remove {
            bail!(Geometry, "cannot remove {} sites from {} in the interface strip", defects.remove, candidates.len());
        }
        candidates.shuffle(&mut rng);
        let mut drop: Vec<usize> = candidates[..defects.remove].to_vec();
        drop.sort_unstable();
        for &i in drop.iter().rev() {
            sites.remove(i);
        }
    }
    let mut taken: std::collections::HashSet<[i64; 2]> = sites.iter().map(|s| key(s.pos)).collect();
    for p in &defects.add_at {
        if !in_box(*p) || !taken.insert(key(*p)) {
            bail!(Geometry, "cannot add a defect site at {p:?}");
        }
        sites.push(Site { pos: *p, kind: SiteKind::Defect });
    }
    if defects.add > 0 {
        let step = 0.5;
        let n1 = (half_width / step).floor() as i64;
        let n2 = (extent[1] / step).floor() as i64;
        let mut free: Vec<[f64; 2]> = (-n1..=n1)
            .flat_map(|i| (-n2..=n2).map(move |j| [i as f64 * step, j as f64 * step]))
            .filter(|p| !taken.contains(&key(*p)))
            .collect();
        if free.len() < defects.add {
            bail!(Geometry, "cannot place {} defect sites, only {} free positions", defects.add, free.len());
        }
        free.shuffle(&mut rng);
        for p in &free[..defects.add] {
            taken.insert(key(*p));
            sites.push(Site { pos: *p, kind: SiteKind::Defect });
        }
    }
    LatticeSample::from_sites(sites, vec![left.clone(), right.clone()], extent, Some(half_width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_sample_counts_and_order() {
        let s = build_bulk_sample(&LatticeSpec::square(), [2.0, 2.0]).unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!(s.dim(), 50);
        assert_eq!(s.site(0).pos, [-2.0, -2.0]);
        assert_eq!(s.site(1).pos, [-2.0, -1.0]);
        assert_eq!(s.index_of([0.0, 0.0]), Some(12));
    }

    #[test]
    fn anisotropic_pitch() {
        let spec = LatticeSpec::new(2, 1, vec![[0.0, 0.0]]).unwrap();
        let s = build_bulk_sample(&spec, [2.0, 1.0]).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.sites().iter().all(|x| x.pos[0] as i64 % 2 == 0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_bulk_sample(&LatticeSpec::square(), [0.0, 1.0]).is_err());
        assert!(LatticeSpec::new(0, 1, vec![[0.0, 0.0]]).is_err());
        assert!(LatticeSpec::new(1, 1, vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn identical_junction_is_bulk() {
        let spec = LatticeSpec::new(1, 1, vec![[0.0, 0.0], [0.5, 0.5]]).unwrap();
        let bulk = build_bulk_sample(&spec, [3.0, 3.0]).unwrap();
        let junction = build_junction_sample(&spec, &spec, [3.0, 3.0], 0.0, &DefectSpec::default()).unwrap();
        let pos = |s: &LatticeSample| s.sites().iter().map(|x| x.pos).collect::<Vec<_>>();
        assert_eq!(pos(&bulk), pos(&junction));
    }

    #[test]
    fn mixed_pitch_junction() {
        let left = LatticeSpec::square();
        let right = LatticeSpec::new(2, 1, vec![[0.0, 0.0]]).unwrap();
        let s = build_junction_sample(&left, &right, [4.0, 2.0], 1.0, &DefectSpec::default()).unwrap();
        for site in s.sites() {
            if site.pos[0] >= 0.0 {
                assert_eq!(site.pos[0] as i64 % 2, 0);
            }
        }
        assert!(s.index_of([-1.0, 0.0]).is_some());
        assert!(s.index_of([1.0, 0.0]).is_none());
    }

    #[test]
    fn defects_are_seeded_and_confined() {
        let spec = LatticeSpec::square();
        let d = DefectSpec { seed: 3, remove: 2, add: 2, ..Default::default() };
        let a = build_junction_sample(&spec, &spec, [4.0, 4.0], 1.0, &d).unwrap();
        let b = build_junction_sample(&spec, &spec, [4.0, 4.0], 1.0, &d).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 81);
        for site in a.sites() {
            if site.kind == SiteKind::Defect {
                assert!(site.pos[0].abs() <= 1.0);
            }
        }
        let outside = DefectSpec { add_at: vec![[2.0, 0.5]], ..Default::default() };
        assert!(build_junction_sample(&spec, &spec, [4.0, 4.0], 1.0, &outside).is_err());
    }
}
