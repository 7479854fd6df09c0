use serde::Serialize;

use super::{region_trace_diagonal, LatticeOperator};
use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::{strip_region, LatticeSample, Region};

/// Partial sums `S_N = sum_{n=-N}^{N-1} Tr(1_{Ω_{n,a} ∩ core} A)` for `N = 1..=N_max`.
#[derive(Debug, Clone, Serialize)]
pub struct PvTraceTrail {
    pub step: f64,
    /// `(n, Tr(1_{Ω_{n,a} ∩ core} A))` for `n = -N_max..N_max`.
    pub strip_traces: Vec<(i64, c64)>,
    /// `S_1, ..., S_{N_max}`.
    pub partial_sums: Vec<c64>,
    /// `S_{N_max}`.
    pub limit: c64,
    /// Largest spread between the partial sums of the last quarter (at least two).
    pub cauchy_gap: f64,
}

impl PvTraceTrail {
    /// Trail from strip traces `(n, t_n)` for `n = -n_max..n_max`.
    pub fn from_strips(step: f64, strip_traces: Vec<(i64, c64)>, n_max: usize) -> Self {
        let mut partial_sums = Vec::with_capacity(n_max);
        for n in 1..=n_max as i64 {
            let s =
                strip_traces.iter().filter(|(k, _)| *k >= -n && *k < n).fold(c64::new(0.0, 0.0), |acc, (_, v)| acc + v);
            partial_sums.push(s);
        }
        let tail = &partial_sums[n_max - (n_max / 4).max(2).min(n_max)..];
        let limit = partial_sums[n_max - 1];
        let mut cauchy_gap: f64 = 0.0;
        for a in tail {
            for b in tail {
                cauchy_gap = cauchy_gap.max((a - b).norm());
            }
        }
        Self { step, strip_traces, partial_sums, limit, cauchy_gap }
    }

    /// Strip-by-strip difference `self - other`; both trails need the same strips.
    pub fn subtract(&self, other: &PvTraceTrail) -> Result<PvTraceTrail> {
        let same = self.step == other.step
            && self.strip_traces.len() == other.strip_traces.len()
            && self.strip_traces.iter().zip(&other.strip_traces).all(|(a, b)| a.0 == b.0);
        if !same {
            bail!(Operator, "trails have different strips");
        }
        let strips = self.strip_traces.iter().zip(&other.strip_traces).map(|(a, b)| (a.0, a.1 - b.1)).collect();
        Ok(Self::from_strips(self.step, strips, self.partial_sums.len()))
    }
}

/// Principal-value trace along `x1` from the diagonal of an operator.
///
/// Strips are intersected with `core`, whose `x1` half-width must contain the
/// window `(-N_max a, N_max a]`. `n_max = None` takes the largest admissible window.
pub fn pv_trace_x1_diagonal(
    diagonal: &[c64],
    sample: &LatticeSample,
    step: f64,
    n_max: Option<usize>,
    core: &Region,
) -> Result<PvTraceTrail> {
    if !(step > 0.0) {
        bail!(Operator, "principal-value step must be positive, got {step}");
    }
    if diagonal.len() != sample.dim() || core.mask().len() != sample.len() {
        bail!(Operator, "diagonal, region and sample sizes disagree");
    }
    let Some(half) = core.core_half_widths() else {
        bail!(Operator, "principal-value trace needs a core window");
    };
    let admissible = ((half[0] + 1e-9) / step).floor() as usize;
    let n_max = n_max.unwrap_or(admissible);
    if n_max == 0 || n_max > admissible {
        bail!(Operator, "window of {n_max} strips of width {step} exceeds the core half-width {}", half[0]);
    }
    let mut strips = Vec::with_capacity(2 * n_max);
    for n in -(n_max as i64)..n_max as i64 {
        let region = strip_region(sample, n, step)?.intersect(core);
        strips.push((n, region_trace_diagonal(diagonal, &region)));
    }
    Ok(PvTraceTrail::from_strips(step, strips, n_max))
}

pub fn pv_trace_x1(a: &LatticeOperator, step: f64, n_max: Option<usize>, core: &Region) -> Result<PvTraceTrail> {
    pv_trace_x1_diagonal(&a.diagonal_entries(), a.sample(), step, n_max, core)
}
