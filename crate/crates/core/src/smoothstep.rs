//! Polynomial smoothstep profiles with closed-form derivatives.
//!
//! The profile of order `n` is the regularized incomplete beta function
//! `I_t(n + 1, n + 1)`: it vanishes for `t <= 0`, equals one for `t >= 1`,
//! and is `n` times continuously differentiable on the whole line.

/// Smoothstep of order `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothstep {
    order: usize,
    norm: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

impl Smoothstep {
    pub fn new(order: usize) -> Self {
        let norm = (2 * order + 1) as f64 * binomial(2 * order, order);
        Self { order, norm }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else if t <= 0.5 {
            self.upper_tail(t)
        } else {
            1.0 - self.upper_tail(1.0 - t)
        }
    }

    // P(X >= n + 1) for X ~ Binomial(2n + 1, t); all terms are positive.
    fn upper_tail(&self, t: f64) -> f64 {
        let n = self.order;
        let m = 2 * n + 1;
        (n + 1..=m).map(|j| binomial(m, j) * t.powi(j as i32) * (1.0 - t).powi((m - j) as i32)).sum()
    }

    /// `m`-th derivative with respect to `t`.
    pub fn derivative(&self, t: f64, m: usize) -> f64 {
        if m == 0 {
            return self.value(t);
        }
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let n = self.order;
        let k = m - 1;
        if k > 2 * n {
            return 0.0;
        }
        let s = 1.0 - t;
        let lo = k.saturating_sub(n);
        let hi = k.min(n);
        let mut acc = 0.0;
        for i in lo..=hi {
            let j = k - i;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc +=
                binomial(k, i) * falling(n, i) * t.powi((n - i) as i32) * sign * falling(n, j) * s.powi((n - j) as i32);
        }
        self.norm * acc
    }
}
