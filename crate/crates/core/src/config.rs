//! Run configuration: TOML input with every unknown key rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calculus::CalculusSettings;
use crate::conductance::{BicSetup, ConductanceSettings};
use crate::error::{bail, Result};
use crate::geometry::{Axis, DefectSpec, SwitchProfile};
use crate::models::{BulkModel, DeltaRule, JunctionModel, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    /// Half-widths `(E1, E2)` of the sample box.
    pub extent: [f64; 2],
    /// Half-widths for size studies.
    #[serde(default)]
    pub sizes: Vec<f64>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { extent: [15.0, 15.0], sizes: vec![10.0, 15.0, 20.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaConfig {
    pub amplitude: f64,
    pub nu: f64,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self { amplitude: 0.0, nu: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectConfig {
    pub remove: usize,
    pub add: usize,
    pub remove_at: Vec<[f64; 2]>,
    pub add_at: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionConfig {
    pub left: ModelSpec,
    pub right: ModelSpec,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_bridge")]
    pub bridge: f64,
    #[serde(default)]
    pub delta: DeltaConfig,
    #[serde(default)]
    pub defects: DefectConfig,
}

fn default_half_width() -> f64 {
    1.0
}

fn default_bridge() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchConfig {
    pub lambda1: SwitchProfile,
    pub lambda2: SwitchProfile,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self { lambda1: SwitchProfile::heaviside(Axis::X1, 0.0), lambda2: SwitchProfile::heaviside(Axis::X2, 0.0) }
    }
}

/// Tolerances deciding the exit status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub bic_residual: f64,
    /// Bound on torque quantities when every Hamiltonian conserves spin.
    pub conserving_torque: f64,
    /// Distance of a spin conductance from its Chern-number value.
    pub quantization: f64,
    /// Bound on interior bulk torque strip traces.
    pub bulk_torque: f64,
    pub imaginary: f64,
    /// Allowed relative growth between successive sizes in a size study.
    pub noise_band: f64,
    /// Confidence level of the decay fit.
    pub confidence: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            bic_residual: 5e-2,
            conserving_torque: 1e-10,
            quantization: 5e-2,
            bulk_torque: 1e-4,
            imaginary: 1e-8,
            noise_band: 0.2,
            confidence: 0.95,
        }
    }
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the interface perturbation (`seed`) and the defects (`seed + 1`).
    #[serde(default)]
    pub seed: u64,
    /// Bulk model for single-model commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction: Option<JunctionConfig>,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub switches: SwitchConfig,
    #[serde(default)]
    pub calculus: CalculusSettings,
    #[serde(default)]
    pub conductance: ConductanceSettings,
    #[serde(default)]
    pub checks: CheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: None,
            junction: None,
            sample: SampleConfig::default(),
            switches: SwitchConfig::default(),
            calculus: CalculusSettings::default(),
            conductance: ConductanceSettings::default(),
            checks: CheckConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| crate::Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| crate::Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.sample.extent;
        if !(e[0] > 0.0 && e[1] > 0.0) {
            bail!(Config, "sample.extent must be positive, got {e:?}");
        }
        if self.sample.sizes.iter().any(|s| !(*s > 0.0)) {
            bail!(Config, "sample.sizes must be positive");
        }
        self.switches.lambda1.validate()?;
        self.switches.lambda2.validate()?;
        if self.switches.lambda1.axis != Axis::X1 || self.switches.lambda2.axis != Axis::X2 {
            bail!(Config, "lambda1 must switch along x1 and lambda2 along x2");
        }
        let c = &self.calculus;
        if c.z_min <= 0.0 || c.quad_panels == 0 || c.gl_order == 0 || c.taylor_order == 0 {
            bail!(Config, "calculus settings must be positive");
        }
        if self.conductance.step_multiplier == 0 || self.conductance.k_grid < 2 {
            bail!(Config, "conductance.step_multiplier and k_grid must be positive");
        }
        if let Some(m) = &self.model {
            m.build()?;
        }
        if let Some(j) = &self.junction {
            j.left.build()?;
            j.right.build()?;
            if !(j.half_width >= 0.0) {
                bail!(Config, "junction.half_width must be non-negative");
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn bulk_model(&self) -> Result<BulkModel> {
        match &self.model {
            Some(m) => m.build(),
            None => bail!(Config, "this command needs a [model] section"),
        }
    }

    pub fn junction_model(&self) -> Result<JunctionModel> {
        let Some(j) = &self.junction else {
            bail!(Config, "this command needs a [junction] section");
        };
        Ok(JunctionModel::new(j.left.build()?, j.right.build()?, j.half_width)
            .with_bridge(j.bridge)
            .with_delta(DeltaRule { amplitude: j.delta.amplitude, nu: j.delta.nu, seed: self.seed }))
    }

    pub fn defects(&self) -> DefectSpec {
        let d = self.junction.as_ref().map(|j| j.defects.clone()).unwrap_or_default();
        DefectSpec {
            seed: self.seed.wrapping_add(1),
            remove: d.remove,
            add: d.add,
            remove_at: d.remove_at,
            add_at: d.add_at,
        }
    }

    pub fn bic_setup(&self, extent: [f64; 2]) -> BicSetup {
        BicSetup { extent, defects: self.defects(), lambda1: self.switches.lambda1, lambda2: self.switches.lambda2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIC: &str = r#"
seed = 3

[junction]
half_width = 1.0
left = { name = "bhz", params = { breaking = 0.2 } }
right = { name = "atomic" }

[junction.delta]
amplitude = 0.1

[sample]
extent = [6.0, 6.0]
"#;

    #[test]
    fn parses_and_hashes() {
        let cfg = RunConfig::from_toml(BIC).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.junction_model().unwrap().delta.seed, 3);
        assert_eq!(cfg.hash(), RunConfig::from_toml(BIC).unwrap().hash());
        let mut other = cfg.clone();
        other.seed = 4;
        assert_ne!(cfg.hash(), other.hash());
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        for bad in [
            "bogus = 1",
            "[sample]\nextent = [1.0, 1.0]\nwidth = 2",
            "[calculus]\nengine = \"spectral\"\norder = 3",
            "[model]\nname = \"bhz\"\nmass = 1.0",
            "[model]\nname = \"bhz\"\nparams = { mass = 1.0 }",
            "[switches.lambda1]\naxis = \"x1\"\nkind = \"heaviside\"\njump_center = 0.0\nextra = 1",
            "[checks]\nbic = 0.1",
        ] {
            assert!(RunConfig::from_toml(bad).is_err(), "accepted: {bad}");
        }
    }

    #[test]
    fn rejects_misoriented_switches() {
        let text = "[switches.lambda1]\naxis = \"x2\"\nkind = \"heaviside\"\njump_center = 0.0";
        assert!(RunConfig::from_toml(text).is_err());
    }
}
