use super::DensityFunction;
use crate::c64;
use crate::error::{bail, Result};
use crate::smoothstep::Smoothstep;

/// Almost-analytic extension `ρ̃(x + iy) = χ(y) Σ_{j<=N} ρ^(j)(x) (iy)^j / j!`.
///
/// The cutoff `χ` equals one for `|y| <= 1/2` and vanishes for `|y| >= 1`, so
/// `|∂ρ̃/∂z̄| <= C_N |y|^N`.
#[derive(Debug, Clone)]
pub struct AlmostAnalyticExtension {
    rho: DensityFunction,
    order: usize,
    cutoff: Smoothstep,
}

/// `|Im z|` below which the cutoff equals one.
pub const CUTOFF_INNER: f64 = 0.5;
/// `|Im z|` beyond which the extension vanishes.
pub const CUTOFF_OUTER: f64 = 1.0;

impl AlmostAnalyticExtension {
    pub fn new(rho: DensityFunction, order: usize) -> Result<Self> {
        if order + 1 > rho.order() {
            bail!(
                Calculus,
                "Taylor order {order} needs a density of smoothness at least {}, got {}",
                order + 1,
                rho.order()
            );
        }
        Ok(Self { rho, order, cutoff: Smoothstep::new(6) })
    }

    pub fn density(&self) -> &DensityFunction {
        &self.rho
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn chi(&self, y: f64, m: usize) -> f64 {
        let w = CUTOFF_OUTER - CUTOFF_INNER;
        let t = (y.abs() - CUTOFF_INNER) / w;
        if m == 0 {
            1.0 - self.cutoff.value(t)
        } else {
            -self.cutoff.derivative(t, 1) / w * y.signum()
        }
    }

    fn taylor(&self, x: f64, y: f64, upto: usize) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        let mut term = c64::new(1.0, 0.0);
        for j in 0..=upto {
            if j > 0 {
                term *= c64::new(0.0, y) / j as f64;
            }
            acc += term * self.rho.derivative(x, j);
        }
        acc
    }

    pub fn value(&self, z: c64) -> c64 {
        if z.im.abs() >= CUTOFF_OUTER {
            return c64::new(0.0, 0.0);
        }
        self.taylor(z.re, z.im, self.order) * self.chi(z.im, 0)
    }

    /// `∂ρ̃/∂z̄ = (∂_x + i ∂_y) ρ̃ / 2`.
    pub fn dbar(&self, z: c64) -> c64 {
        let (x, y) = (z.re, z.im);
        if y.abs() >= CUTOFF_OUTER {
            return c64::new(0.0, 0.0);
        }
        let n = self.order;
        let mut top = c64::new(self.rho.derivative(x, n + 1), 0.0);
        for j in 1..=n {
            top *= c64::new(0.0, y) / j as f64;
        }
        let mut out = top * self.chi(y, 0);
        let dchi = self.chi(y, 1);
        if dchi != 0.0 {
            out += c64::new(0.0, dchi) * self.taylor(x, y, n);
        }
        out * 0.5
    }

    /// Sampled estimate of `sup |∂ρ̃/∂z̄| / |y|^N`.
    pub fn decay_constant(&self) -> f64 {
        let [a, b] = self.rho.support();
        let mut best = 0.0f64;
        for i in 0..=400 {
            let x = a + (b - a) * i as f64 / 400.0;
            for k in 1..=100 {
                let y = k as f64 / 100.0;
                best = best.max(self.dbar(c64::new(x, y)).norm() / y.powi(self.order as i32));
            }
        }
        best
    }
}
