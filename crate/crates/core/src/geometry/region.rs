use super::LatticeSample;
use crate::error::{bail, Result};

/// How a region was built.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionKind {
    /// Vertical strip `n a < x1 <= (n + 1) a`; `gridline_sites` counts sites
    /// sitting on the upper boundary, which belong to this strip.
    Strip {
        n: i64,
        width: f64,
        gridline_sites: usize,
    },
    /// Square `|x1|, |x2| <= radius`.
    Centered {
        radius: f64,
    },
    /// `x1 > 0` (or `x1 <= 0` when `positive` is false).
    HalfPlane {
        positive: bool,
    },
    /// Interior window `|x1| <= half_widths[0]`, `|x2| <= half_widths[1]`.
    Core {
        half_widths: [f64; 2],
    },
    Intersection(Box<RegionKind>, Box<RegionKind>),
}

/// Subset of sample sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    mask: Vec<bool>,
    kind: RegionKind,
}

impl Region {
    pub fn from_mask(mask: Vec<bool>, kind: RegionKind) -> Self {
        Self { mask, kind }
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn contains(&self, site: usize) -> bool {
        self.mask[site]
    }

    /// Whether state `k` (site `k / SPIN_DIM`) lies in the region.
    pub fn contains_state(&self, k: usize) -> bool {
        self.mask[k / super::SPIN_DIM]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        assert_eq!(self.mask.len(), other.mask.len(), "regions on different samples");
        Region {
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
            kind: RegionKind::Intersection(Box::new(self.kind.clone()), Box::new(other.kind.clone())),
        }
    }

    /// `x1` half-width of a core window, looking through intersections.
    pub fn core_half_widths(&self) -> Option<[f64; 2]> {
        fn find(k: &RegionKind) -> Option<[f64; 2]> {
            match k {
                RegionKind::Core { half_widths } => Some(*half_widths),
                RegionKind::Intersection(a, b) => find(a).or_else(|| find(b)),
                _ => None,
            }
        }
        find(&self.kind)
    }
}

const EPS: f64 = 1e-9;

/// Strip `Omega_{n,a}`; sites on a gridline go to the strip below it.
pub fn strip_region(sample: &LatticeSample, n: i64, width: f64) -> Result<Region> {
    if !(width > 0.0) {
        bail!(Geometry, "strip width must be positive, got {width}");
    }
    let lo = n as f64 * width;
    let hi = lo + width;
    let mut gridline_sites = 0;
    let mask = sample
        .sites()
        .iter()
        .map(|s| {
            let x = s.pos[0];
            let on_top = (x - hi).abs() <= EPS;
            gridline_sites += on_top as usize;
            x > lo + EPS && (x < hi - EPS || on_top)
        })
        .collect();
    Ok(Region { mask, kind: RegionKind::Strip { n, width, gridline_sites } })
}

pub fn centered_region(sample: &LatticeSample, radius: f64) -> Region {
    let mask =
        sample.sites().iter().map(|s| s.pos[0].abs() <= radius + EPS && s.pos[1].abs() <= radius + EPS).collect();
    Region { mask, kind: RegionKind::Centered { radius } }
}

pub fn half_plane_region(sample: &LatticeSample, positive: bool) -> Region {
    let mask = sample.sites().iter().map(|s| (s.pos[0] > 0.0) == positive).collect();
    Region { mask, kind: RegionKind::HalfPlane { positive } }
}

/// Interior window keeping a fraction `margin` of each half-width away from the boundary.
pub fn core_region(sample: &LatticeSample, margin: [f64; 2]) -> Result<Region> {
    for m in margin {
        if !(0.0..1.0).contains(&m) {
            bail!(Geometry, "core margin must lie in [0, 1), got {m}");
        }
    }
    let e = sample.extent();
    let half_widths = [e[0] * (1.0 - margin[0]), e[1] * (1.0 - margin[1])];
    let mask = sample
        .sites()
        .iter()
        .map(|s| s.pos[0].abs() <= half_widths[0] + EPS && s.pos[1].abs() <= half_widths[1] + EPS)
        .collect();
    Ok(Region { mask, kind: RegionKind::Core { half_widths } })
}
