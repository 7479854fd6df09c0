use serde::Serialize;

use crate::error::{bail, Result};
use crate::smoothstep::Smoothstep;

/// Compactly supported density `ρ` for a ground state below a spectral gap.
///
/// `ρ` rises from `0` to `1` over `[b - 1.5, b - 0.5]` below the spectrum floor
/// `b`, equals `1` up to the gap, and falls back to `0` inside the gap, over
/// the gap with a fraction `margins[0]` removed at the bottom and `margins[1]`
/// at the top.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityFunction {
    gap: [f64; 2],
    floor: f64,
    margins: [f64; 2],
    order: usize,
    #[serde(skip)]
    step: Smoothstep,
    lower: [f64; 2],
    upper: [f64; 2],
}

impl DensityFunction {
    pub const DEFAULT_ORDER: usize = 14;
    pub const DEFAULT_MARGIN: f64 = 0.1;

    pub fn new(gap: [f64; 2], floor: f64) -> Result<Self> {
        Self::with_profile(gap, floor, Self::DEFAULT_ORDER, [Self::DEFAULT_MARGIN; 2])
    }

    pub fn with_profile(gap: [f64; 2], floor: f64, order: usize, margins: [f64; 2]) -> Result<Self> {
        if !(gap[0] < gap[1]) || !gap.iter().all(|g| g.is_finite()) {
            bail!(Calculus, "invalid gap {gap:?}");
        }
        if !(floor < gap[0]) {
            bail!(Calculus, "spectrum floor {floor} is not below the gap {gap:?}");
        }
        if order == 0 {
            bail!(Calculus, "density profile must be at least C^1");
        }
        if !margins.iter().all(|m| (0.0..1.0).contains(m)) || margins[0] + margins[1] >= 1.0 {
            bail!(Calculus, "gap margins {margins:?} leave no room for the transition");
        }
        let w = gap[1] - gap[0];
        Ok(Self {
            gap,
            floor,
            margins,
            order,
            step: Smoothstep::new(order),
            lower: [floor - 1.5, floor - 0.5],
            upper: [gap[0] + margins[0] * w, gap[1] - margins[1] * w],
        })
    }

    /// Same profile with different margins inside the gap.
    pub fn with_margins(&self, margins: [f64; 2]) -> Result<Self> {
        Self::with_profile(self.gap, self.floor, self.order, margins)
    }

    pub fn gap(&self) -> [f64; 2] {
        self.gap
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn margins(&self) -> [f64; 2] {
        self.margins
    }

    pub fn midgap(&self) -> f64 {
        0.5 * (self.gap[0] + self.gap[1])
    }

    /// Interval where `ρ` falls from `1` to `0`.
    pub fn transition(&self) -> [f64; 2] {
        self.upper
    }

    /// Interval where `ρ` rises from `0` to `1`.
    pub fn lower_ramp(&self) -> [f64; 2] {
        self.lower
    }

    pub fn support(&self) -> [f64; 2] {
        [self.lower[0], self.upper[1]]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `m`-th derivative.
    pub fn derivative(&self, x: f64, m: usize) -> f64 {
        let [l0, l1] = self.lower;
        let [u0, u1] = self.upper;
        if x <= l0 || x >= u1 {
            0.0
        } else if x < l1 {
            let w = l1 - l0;
            self.step.derivative((x - l0) / w, m) / w.powi(m as i32)
        } else if x <= u0 {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            let w = u1 - u0;
            let d = self.step.derivative((x - u0) / w, m) / w.powi(m as i32);
            if m == 0 {
                1.0 - d
            } else {
                -d
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_midgap_and_support() {
        let rho = DensityFunction::new([-0.5, 0.5], -3.0).unwrap();
        assert_eq!(rho.value(-3.0), 1.0);
        assert_eq!(rho.value(-0.45), 1.0);
        assert!((rho.value(0.0) - 0.5).abs() < 1e-14);
        assert_eq!(rho.value(0.45), 0.0);
        assert_eq!(rho.value(-10.0), 0.0);
        assert_eq!(rho.support(), [-4.5, 0.4]);
    }

    #[test]
    fn derivative_integrates_to_minus_one_over_gap() {
        let rho = DensityFunction::new([-0.5, 0.5], -3.0).unwrap();
        let n = 20000;
        let h = 1.0 / n as f64;
        let total: f64 = (0..n).map(|k| rho.derivative(-0.5 + (k as f64 + 0.5) * h, 1) * h).sum();
        assert!((total + 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_invalid() {
        assert!(DensityFunction::new([0.5, -0.5], -3.0).is_err());
        assert!(DensityFunction::new([-0.5, 0.5], 0.0).is_err());
        assert!(DensityFunction::with_profile([-0.5, 0.5], -3.0, 14, [0.6, 0.5]).is_err());
    }
}
