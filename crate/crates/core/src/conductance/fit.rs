use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{bail, Result};

/// Least-squares fit of `v ≈ C exp(-c d)` on the logarithm.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentialFit {
    /// Decay rate `c`.
    pub rate: f64,
    /// Two-sided confidence interval for `c`.
    pub rate_interval: [f64; 2],
    pub confidence: f64,
    /// Smallest `C` with `v ≤ C exp(-c d)` at every fitted point.
    pub prefactor: f64,
    pub points: usize,
    /// The lower end of the interval is positive.
    pub decaying: bool,
}

/// Fits `(distance, value)` pairs, ignoring values that are not positive.
pub fn fit_exponential_decay(data: &[(f64, f64)], confidence: f64) -> Result<ExponentialFit> {
    if !(0.0 < confidence && confidence < 1.0) {
        bail!(Conductance, "confidence must lie in (0, 1), got {confidence}");
    }
    let pts: Vec<(f64, f64)> = data.iter().filter(|(_, v)| *v > 0.0).map(|&(d, v)| (d, v.ln())).collect();
    let n = pts.len();
    if n < 3 {
        bail!(Conductance, "exponential fit needs at least 3 positive values, got {n}");
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        bail!(Conductance, "exponential fit needs at least two distinct distances");
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| crate::Error::Conductance(e.to_string()))?
        .inverse_cdf(0.5 + 0.5 * confidence);
    let rate = -slope;
    let rate_interval = [rate - t * se, rate + t * se];
    let prefactor = data.iter().filter(|(_, v)| *v > 0.0).map(|&(d, v)| v * (rate * d).exp()).fold(0.0, f64::max);
    Ok(ExponentialFit { rate, rate_interval, confidence, prefactor, points: n, decaying: rate_interval[0] > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_rate() {
        let data: Vec<(f64, f64)> = (0..10).map(|d| (d as f64, 3.0 * (-0.8 * d as f64).exp())).collect();
        let fit = fit_exponential_decay(&data, 0.95).unwrap();
        assert!((fit.rate - 0.8).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
        assert!(fit.decaying);
    }

    #[test]
    fn flat_data_is_not_decaying() {
        let data: Vec<(f64, f64)> = (0..10).map(|d| (d as f64, 1.0 + 0.1 * ((d * 7) % 3) as f64)).collect();
        assert!(!fit_exponential_decay(&data, 0.95).unwrap().decaying);
        assert!(fit_exponential_decay(&data[..2], 0.95).is_err());
    }
}
