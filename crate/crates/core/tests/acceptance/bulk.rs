//! Bulk criteria on 30×30 samples of the preset models.

use spinbic::calculus::{AlmostAnalyticExtension, DensityFunction};
use spinbic::conductance::{
    bulk_spin_conductance, chern_k_space, density_for, torque_conductance, ConductanceSettings, PvValue, SpectralSystem,
};
use spinbic::geometry::{build_bulk_sample, Axis, SwitchProfile};
use spinbic::models::{band_gap, realize_bulk, SpinSector};

use crate::{preset, Cache, Verdict};

pub const TOPOLOGICAL: [&str; 2] = ["haldane.toml", "kane_mele.toml"];
pub const TRIVIAL: [&str; 2] = ["haldane_trivial.toml", "kane_mele_trivial.toml"];
pub const MIXING: &str = "bhz_breaking.toml";

/// Everything the bulk criteria need from one preset.
pub struct BulkStudy {
    pub sigma: PvValue,
    /// `(C↑, C↓)` from the k-space oracle when the model conserves spin.
    pub chern: Option<(i64, i64)>,
    /// `σ` with a smooth `Λ1`, a different `ρ` profile, and `k = 2`.
    pub variants: Option<[f64; 3]>,
    /// Bulk torque trail `Tr^pv Σ^{Λ2, S}` with strips one period wide.
    pub torque: Option<PvValue>,
    pub conserving: bool,
}

pub fn study(name: &str, full: bool) -> BulkStudy {
    let cfg = preset(name);
    let model = cfg.bulk_model().unwrap();
    let cs = &cfg.conductance;
    let settings = &cfg.calculus;
    let sw = &cfg.switches;
    let gap = band_gap(&model, cs.k_grid, None).unwrap();
    let sample = build_bulk_sample(model.lattice(), cfg.sample.extent).unwrap().into_shared();
    let h = realize_bulk(&model, sample).unwrap();
    let rho = density_for(gap, &[&h], cs).unwrap();
    let ext = AlmostAnalyticExtension::new(rho.clone(), settings.taylor_order).unwrap();
    let sys = SpectralSystem::new(h, cs.core_margin).unwrap();
    let sigma_with = |l1: &SwitchProfile, ext: &AlmostAnalyticExtension, cs: &ConductanceSettings| {
        bulk_spin_conductance(&sys, l1, &sw.lambda2, ext, settings, cs).unwrap()
    };
    let sigma = sigma_with(&sw.lambda1, &ext, cs);
    let conserving = model.spin_conserving();
    let chern = conserving.then(|| {
        let c = |s| chern_k_space(&model, s, None, cs.k_grid).unwrap().value;
        (c(SpinSector::Up), c(SpinSector::Down))
    });
    let (variants, torque) = if full {
        let smooth = SwitchProfile::smooth(Axis::X1, 0.0, 3.0);
        let other_rho = DensityFunction::with_profile(gap, rho.floor(), 8, [0.2, 0.2]).unwrap();
        let other_ext = AlmostAnalyticExtension::new(other_rho, settings.taylor_order).unwrap();
        let double = ConductanceSettings { step_multiplier: 2, ..cs.clone() };
        let v = [
            sigma_with(&smooth, &ext, cs).value,
            sigma_with(&sw.lambda1, &other_ext, cs).value,
            sigma_with(&sw.lambda1, &ext, &double).value,
        ];
        let step = model.lattice().a1 as f64;
        let t = torque_conductance(&sys, &sw.lambda2, step, &ext, settings, cs).unwrap();
        (Some(v), Some(t))
    } else {
        (None, None)
    };
    BulkStudy { sigma, chern, variants, torque, conserving }
}

pub fn quantization(cache: &mut Cache) -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in TOPOLOGICAL {
        let s = cache.bulk(name, true);
        let (up, down) = s.chern.unwrap();
        let target = 0.5 * (up - down) as f64;
        let err = (s.sigma.value - target).abs();
        passed &= err <= 5e-2 && up == -down;
        parts.push(format!("{name}: σ = {:.6} vs ½(C↑−C↓) = {target} (C↑ = {up}, C↓ = {down})", s.sigma.value));
    }
    Verdict::new(passed, parts.join("; "))
}

pub fn z2_parity(cache: &mut Cache) -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, full) in TOPOLOGICAL.iter().map(|n| (n, true)).chain(TRIVIAL.iter().map(|n| (n, false))) {
        let s = cache.bulk(name, full);
        let (up, _) = s.chern.unwrap();
        let from_sigma = (s.sigma.value.round() as i64).rem_euclid(2);
        let from_chern = up.rem_euclid(2);
        passed &= from_sigma == from_chern;
        parts.push(format!("{name}: σ = {:.4} → {from_sigma}, C↑ mod 2 = {from_chern}", s.sigma.value));
    }
    Verdict::new(passed, parts.join("; "))
}

pub fn invariance(cache: &mut Cache) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for name in TOPOLOGICAL.iter().chain([&MIXING]) {
        let s = cache.bulk(name, true);
        let v = s.variants.unwrap();
        let d = v.map(|x| (x - s.sigma.value).abs());
        worst = worst.max(d.iter().cloned().fold(0.0, f64::max));
        parts.push(format!(
            "{name}: σ = {:.7}, Δ smooth Λ1 {:.1e}, Δ ρ profile {:.1e}, Δ k=2 {:.1e}",
            s.sigma.value, d[0], d[1], d[2]
        ));
    }
    Verdict::new(worst <= 1e-4, parts.join("; "))
}

/// Strips of the inner half of the principal-value window.
pub fn interior_max(v: &PvValue) -> f64 {
    let n_max = v.trail.partial_sums.len() as i64;
    v.trail.strip_traces.iter().filter(|(n, _)| (2 * n + 1).abs() <= n_max).map(|(_, t)| t.norm()).fold(0.0, f64::max)
}

pub fn bulk_torque(cache: &mut Cache) -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in [MIXING].iter().chain(TOPOLOGICAL.iter()) {
        let s = cache.bulk(name, true);
        let t = s.torque.as_ref().unwrap();
        let worst = interior_max(t);
        let all = t.trail.strip_traces.iter().map(|(_, x)| x.norm()).fold(0.0, f64::max);
        let tol = if s.conserving { 1e-10 } else { 1e-4 };
        passed &= worst <= tol;
        parts.push(format!("{name}: interior max {worst:.2e} (tolerance {tol:.0e}, all strips {all:.2e})"));
    }
    Verdict::new(passed, parts.join("; "))
}
