use std::collections::BTreeMap;

use serde::Serialize;

use super::LatticeOperator;
use crate::geometry::{LatticeSample, SPIN_DIM};

/// Entries at or below this magnitude count as zero.
pub const DECAY_CUTOFF: f64 = 1e-14;

/// Exponential envelope `|A(x, y)| <= c e^{-λ d(x, y)}` fitted to an operator.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub lambda_hat: f64,
    pub c_hat: f64,
    /// `max (|A(x, y)| - c e^{-λ d(x, y)})`; non-positive when the bound holds.
    pub max_violation: f64,
    /// Largest distance carrying an entry above the cutoff.
    pub range: f64,
    pub certified: bool,
}

/// Fits the envelope against the `l1` distance between sites.
pub fn verify_tight_binding(a: &LatticeOperator) -> DecayFit {
    let s = a.sample().clone();
    verify_decay(a, |x, y| {
        let (p, q) = (s.site(x).pos, s.site(y).pos);
        (p[0] - q[0]).abs() + (p[1] - q[1]).abs()
    })
}

/// Fits the envelope against an arbitrary site metric `d(x, y)`.
///
/// The decay rate is the least-squares slope of the log of the per-distance
/// maximum between the first and last nonzero shells; the next shell enters
/// once at the cutoff level. The prefactor is then the smallest one making the bound hold.
pub fn verify_decay(a: &LatticeOperator, distance: impl Fn(usize, usize) -> f64) -> DecayFit {
    let sample: &LatticeSample = a.sample();
    let n = sample.len();
    let m = a.matrix();
    let block_max = |x: usize, y: usize| {
        let mut best = 0.0f64;
        for s in 0..SPIN_DIM {
            for t in 0..SPIN_DIM {
                best = best.max(m[(SPIN_DIM * x + s, SPIN_DIM * y + t)].norm());
            }
        }
        best
    };
    let mut shells: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let mut entries = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let d = distance(x, y);
            let v = block_max(x, y);
            let e = shells.entry((d * 1e6).round() as i64).or_insert((d, 0.0));
            e.1 = e.1.max(v);
            if v > DECAY_CUTOFF {
                entries.push((d, v));
            }
        }
    }
    let scale = entries.iter().fold(0.0f64, |acc, e| acc.max(e.1));
    let last_nonzero = shells.values().filter(|s| s.1 > DECAY_CUTOFF).map(|s| s.0).fold(f64::NAN, f64::max);
    if entries.is_empty() {
        return DecayFit { lambda_hat: f64::INFINITY, c_hat: 0.0, max_violation: 0.0, range: 0.0, certified: true };
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    let first_nonzero = shells.values().filter(|s| s.1 > DECAY_CUTOFF).map(|s| s.0).fold(f64::NAN, f64::min);
    for &(d, v) in shells.values() {
        if d < first_nonzero - 1e-9 {
            continue;
        }
        if d <= last_nonzero + 1e-9 {
            points.push((d, v.max(DECAY_CUTOFF).ln()));
        } else {
            points.push((d, DECAY_CUTOFF.ln()));
            break;
        }
    }
    let slope = if points.len() < 2 {
        0.0
    } else {
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let lambda_hat = (-slope).max(0.0);
    let log_c = entries.iter().map(|(d, v)| v.ln() + lambda_hat * d).fold(f64::NEG_INFINITY, f64::max);
    let c_hat = log_c.exp() * (1.0 + 1e-12);
    let max_violation =
        entries.iter().map(|(d, v)| v - c_hat * (-lambda_hat * d).exp()).fold(f64::NEG_INFINITY, f64::max);
    let span = points.last().map(|p| p.0).unwrap_or(0.0) - points[0].0;
    let certified = max_violation <= 1e-15 * scale && lambda_hat * span >= std::f64::consts::LN_10;
    DecayFit { lambda_hat, c_hat, max_violation, range: last_nonzero, certified }
}
