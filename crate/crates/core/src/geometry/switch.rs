use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::smoothstep::Smoothstep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchKind {
    /// `1` strictly above the jump, `0` at or below it.
    Heaviside,
    /// Smoothstep of the given order rising over `width` around the jump.
    SmoothRamp { width: f64, order: usize },
}

/// Switch function `Lambda` depending on one coordinate: `0` far below, `1` far above.
///
/// Written as `{ axis, kind = "heaviside" | "smooth_ramp", jump_center, width, order }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSwitch", into = "RawSwitch")]
pub struct SwitchProfile {
    pub axis: Axis,
    pub kind: SwitchKind,
    pub jump_center: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwitch {
    axis: Axis,
    kind: String,
    jump_center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
}

impl TryFrom<RawSwitch> for SwitchProfile {
    type Error = String;

    fn try_from(r: RawSwitch) -> std::result::Result<Self, String> {
        let kind = match (r.kind.as_str(), r.width, r.order) {
            ("heaviside", None, None) => SwitchKind::Heaviside,
            ("heaviside", _, _) => return Err("a heaviside switch takes no width or order".into()),
            ("smooth_ramp", Some(width), order) => SwitchKind::SmoothRamp { width, order: order.unwrap_or(14) },
            ("smooth_ramp", None, _) => return Err("a smooth_ramp switch needs a width".into()),
            (other, _, _) => return Err(format!("unknown switch kind '{other}' (heaviside, smooth_ramp)")),
        };
        Ok(Self { axis: r.axis, kind, jump_center: r.jump_center })
    }
}

impl From<SwitchProfile> for RawSwitch {
    fn from(p: SwitchProfile) -> Self {
        let (kind, width, order) = match p.kind {
            SwitchKind::Heaviside => ("heaviside", None, None),
            SwitchKind::SmoothRamp { width, order } => ("smooth_ramp", Some(width), Some(order)),
        };
        Self { axis: p.axis, kind: kind.into(), jump_center: p.jump_center, width, order }
    }
}

impl SwitchProfile {
    pub fn heaviside(axis: Axis, jump_center: f64) -> Self {
        Self { axis, kind: SwitchKind::Heaviside, jump_center }
    }

    pub fn smooth(axis: Axis, jump_center: f64, width: f64) -> Self {
        Self { axis, kind: SwitchKind::SmoothRamp { width, order: 14 }, jump_center }
    }

    pub fn validate(&self) -> Result<()> {
        if let SwitchKind::SmoothRamp { width, .. } = self.kind {
            if !(width > 0.0) {
                bail!(Geometry, "ramp width must be positive, got {width}");
            }
        }
        if !self.jump_center.is_finite() {
            bail!(Geometry, "jump center must be finite");
        }
        Ok(())
    }

    /// Same profile with its jump moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { jump_center: self.jump_center + shift, ..*self }
    }

    pub fn value(&self, point: [f64; 2]) -> f64 {
        let x = match self.axis {
            Axis::X1 => point[0],
            Axis::X2 => point[1],
        } - self.jump_center;
        match self.kind {
            SwitchKind::Heaviside => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SwitchKind::SmoothRamp { width, order } => Smoothstep::new(order).value(x / width + 0.5),
        }
    }
}

pub fn evaluate_switch(profile: &SwitchProfile, point: [f64; 2]) -> Result<f64> {
    profile.validate()?;
    Ok(profile.value(point))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heaviside_and_ramp() {
        let h = SwitchProfile::heaviside(Axis::X1, 0.0);
        assert_eq!(h.value([-1.0, 0.0]), 0.0);
        assert_eq!(h.value([0.0, 3.0]), 0.0);
        assert_eq!(h.value([1.0, -7.0]), 1.0);
        let r = SwitchProfile::smooth(Axis::X2, 1.0, 2.0);
        assert!((r.value([9.0, 1.0]) - 0.5).abs() < 1e-15);
        assert_eq!(r.value([0.0, 2.0]), 1.0);
        assert_eq!(r.value([0.0, 0.0]), 0.0);
        let bad = SwitchProfile::smooth(Axis::X1, 0.0, 0.0);
        assert!(evaluate_switch(&bad, [0.0, 0.0]).is_err());
    }
}
