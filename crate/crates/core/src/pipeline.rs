//! Command runners shared by the command-line tool and the tests.

use std::f64::consts::PI;
use std::time::Instant;

use serde_json::json;

use crate::calculus::AlmostAnalyticExtension;
use crate::conductance::{
    bulk_spin_conductance, chern_k_space, chern_real_space, common_step, density_for, drift_conductance,
    fit_exponential_decay, kubo_spin_conductance, torque_conductance, verify_bic, ConductanceReport, PvValue,
    SpectralSystem,
};
use crate::config::RunConfig;
use crate::error::{bail, Result};
use crate::geometry::{build_bulk_sample, build_junction_sample};
use crate::models::{
    band_gap, realize_bulk, realize_junction, spectrum_bounds, BlochHamiltonian, BulkModel, SpinSector,
};
use crate::record::{Check, RunRecord, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyBic,
    BulkConductance,
    Drift,
    Torque,
    Chern,
    Spectrum,
    Convergence,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyBic,
        Command::BulkConductance,
        Command::Drift,
        Command::Torque,
        Command::Chern,
        Command::Spectrum,
        Command::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyBic => "verify-bic",
            Command::BulkConductance => "bulk-conductance",
            Command::Drift => "drift",
            Command::Torque => "torque",
            Command::Chern => "chern",
            Command::Spectrum => "spectrum",
            Command::Convergence => "convergence",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Command::ALL.iter().find(|c| c.name() == s) {
            Some(c) => Ok(*c),
            None => bail!(Config, "unknown command '{s}'"),
        }
    }
}

/// Results, checks and series of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

/// Runs `command` and wraps the outcome in a record.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let out = match command {
        Command::VerifyBic => run_verify_bic(cfg)?,
        Command::BulkConductance => run_bulk_conductance(cfg)?,
        Command::Drift => run_drift(cfg)?,
        Command::Torque => run_torque(cfg)?,
        Command::Chern => run_chern(cfg)?,
        Command::Spectrum => run_spectrum(cfg)?,
        Command::Convergence => run_convergence(cfg)?,
    };
    let wall = start.elapsed().as_secs_f64();
    Ok(RunRecord::new(command.name(), cfg, out.results, out.checks, out.tables, wall))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

/// `(N, Re S_N, Im S_N)` for a principal-value trail.
pub fn pv_trail_table(name: &str, v: &PvValue) -> Table {
    let mut t = Table::new(name, &["window_N", "partial_sum", "partial_sum_imag"]);
    for (i, s) in v.trail.partial_sums.iter().enumerate() {
        t.push(vec![(i + 1) as f64, s.re, s.im]);
    }
    t
}

/// `(n, Re t_n, |t_n|)` for the strip traces of a trail.
pub fn strip_table(name: &str, v: &PvValue) -> Table {
    let mut t = Table::new(name, &["strip_n", "trace", "abs_trace"]);
    for (n, s) in &v.trail.strip_traces {
        t.push(vec![*n as f64, s.re, s.norm()]);
    }
    t
}

fn pv_checks(prefix: &str, v: &PvValue, cfg: &RunConfig) -> Vec<Check> {
    vec![
        Check::at_most(&format!("{prefix}_pv_cauchy_gap"), v.trail.cauchy_gap, cfg.conductance.pv_tol),
        Check::at_most(&format!("{prefix}_imaginary"), v.imag.abs(), cfg.checks.imaginary),
    ]
}

fn bic_checks(r: &ConductanceReport, cfg: &RunConfig) -> Vec<Check> {
    let mut checks = vec![Check::at_most("bic_residual", r.bic_residual, cfg.checks.bic_residual)];
    checks.extend(pv_checks("sigma_plus", &r.sigma_plus, cfg));
    checks.extend(pv_checks("sigma_minus", &r.sigma_minus, cfg));
    checks.extend(pv_checks("sigma_torque", &r.sigma_torque, cfg));
    checks.push(Check::at_most("sigma_drift_imaginary", r.sigma_drift.imag.abs(), cfg.checks.imaginary));
    if r.spin_torque_norms.iter().all(|&n| n <= 1e-12) {
        checks.push(Check::at_most("conserving_torque", r.sigma_torque.value.abs(), cfg.checks.conserving_torque));
    }
    checks
}

fn run_verify_bic(cfg: &RunConfig) -> Result<Outcome> {
    let jm = cfg.junction_model()?;
    let r = verify_bic(&jm, &cfg.bic_setup(cfg.sample.extent), &cfg.calculus, &cfg.conductance)?;
    Ok(Outcome {
        checks: bic_checks(&r, cfg),
        tables: vec![
            pv_trail_table("pv_trail_plus", &r.sigma_plus),
            pv_trail_table("pv_trail_minus", &r.sigma_minus),
            pv_trail_table("pv_trail_torque", &r.sigma_torque),
            strip_table("strip_torque_profile", &r.sigma_torque),
        ],
        results: to_json(&r)?,
    })
}

/// Bulk Hamiltonian on the configured sample with its density and extension.
fn bulk_system(model: &BulkModel, cfg: &RunConfig) -> Result<(SpectralSystem, AlmostAnalyticExtension)> {
    let gap = band_gap(model, cfg.conductance.k_grid, None)?;
    let sample = build_bulk_sample(model.lattice(), cfg.sample.extent)?.into_shared();
    let h = realize_bulk(model, sample)?;
    let rho = density_for(gap, &[&h], &cfg.conductance)?;
    let ext = AlmostAnalyticExtension::new(rho, cfg.calculus.taylor_order)?;
    Ok((SpectralSystem::new(h, cfg.conductance.core_margin)?, ext))
}

fn fermi(cfg: &RunConfig, ext: &AlmostAnalyticExtension) -> f64 {
    cfg.conductance.fermi.unwrap_or_else(|| ext.density().midgap())
}

fn run_bulk_conductance(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.bulk_model()?;
    let (sys, ext) = bulk_system(&model, cfg)?;
    let sw = &cfg.switches;
    let sigma = bulk_spin_conductance(&sys, &sw.lambda1, &sw.lambda2, &ext, &cfg.calculus, &cfg.conductance)?;
    let p = sys.projection_below(fermi(cfg, &ext));
    let kubo = kubo_spin_conductance(&p, &sw.lambda1, &sw.lambda2, sys.core())?;
    let mut checks = pv_checks("sigma", &sigma, cfg);
    let mut results = json!({
        "model": model,
        "sigma": sigma,
        "kubo": kubo,
        "spin_torque_norm": sys.spin_torque_norm(),
        "density": ext.density(),
    });
    if model.spin_conserving() {
        let up = chern_k_space(&model, SpinSector::Up, None, cfg.conductance.k_grid)?;
        let down = chern_k_space(&model, SpinSector::Down, None, cfg.conductance.k_grid)?;
        let spin_chern = 0.5 * (up.value - down.value) as f64;
        checks.push(Check::at_most("quantization", (sigma.value - spin_chern).abs(), cfg.checks.quantization));
        checks.push(Check::at_most("kubo_agreement", (sigma.value - kubo.value).abs(), cfg.checks.quantization));
        results["chern_up"] = to_json(&up)?;
        results["chern_down"] = to_json(&down)?;
        results["spin_chern"] = json!(spin_chern);
    }
    Ok(Outcome {
        results,
        checks,
        tables: vec![pv_trail_table("pv_trail", &sigma), strip_table("strip_profile", &sigma)],
    })
}

fn junction_system(cfg: &RunConfig) -> Result<(SpectralSystem, AlmostAnalyticExtension, [f64; 2])> {
    let jm = cfg.junction_model()?;
    let gap = jm.common_gap(cfg.conductance.k_grid)?;
    let sample =
        build_junction_sample(jm.left.lattice(), jm.right.lattice(), cfg.sample.extent, jm.half_width, &cfg.defects())?
            .into_shared();
    let h = realize_junction(&jm, sample)?;
    let rho = density_for(gap, &[&h], &cfg.conductance)?;
    let ext = AlmostAnalyticExtension::new(rho, cfg.calculus.taylor_order)?;
    Ok((SpectralSystem::new(h, cfg.conductance.core_margin)?, ext, gap))
}

fn run_drift(cfg: &RunConfig) -> Result<Outcome> {
    let (sys, ext, gap) = junction_system(cfg)?;
    let drift = drift_conductance(&sys, &cfg.switches.lambda2, ext.density())?;
    Ok(Outcome {
        results: json!({ "sigma_drift": drift, "gap": gap, "density": ext.density() }),
        checks: vec![Check::at_most("sigma_drift_imaginary", drift.imag.abs(), cfg.checks.imaginary)],
        tables: vec![],
    })
}

/// Strips lying in the inner half of the principal-value window.
fn interior_strips(v: &PvValue) -> impl Iterator<Item = &(i64, crate::c64)> {
    let n_max = v.trail.partial_sums.len() as i64;
    v.trail.strip_traces.iter().filter(move |(n, _)| (2 * n + 1).abs() <= n_max)
}

/// Distance of each strip center from `x1 = 0`.
fn strip_decay_points(v: &PvValue) -> impl Iterator<Item = f64> + '_ {
    v.trail.strip_traces.iter().map(|(n, _)| ((*n as f64) + 0.5).abs() * v.trail.step)
}

/// Decay data `(|center of strip n|, |t_n|)`, leaving out strips that vanish identically.
pub fn strip_decay_data(v: &PvValue) -> Vec<(f64, f64)> {
    let peak = v.trail.strip_traces.iter().map(|(_, t)| t.norm()).fold(0.0, f64::max);
    strip_decay_points(v)
        .zip(&v.trail.strip_traces)
        .filter(|(_, (_, t))| t.norm() > 1e-12 * peak)
        .map(|(d, (_, t))| (d, t.norm()))
        .collect()
}

fn run_torque(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.junction.is_some() {
        let (torque, gap, norm) = if cfg.conductance.torque_subtraction {
            // The bulk reference trails come with the full identity check.
            let jm = cfg.junction_model()?;
            let r = verify_bic(&jm, &cfg.bic_setup(cfg.sample.extent), &cfg.calculus, &cfg.conductance)?;
            (r.sigma_torque, r.gap, r.spin_torque_norms[2])
        } else {
            let (sys, ext, gap) = junction_system(cfg)?;
            let step = common_step(sys.sample());
            let t = torque_conductance(&sys, &cfg.switches.lambda2, step, &ext, &cfg.calculus, &cfg.conductance)?;
            (t, gap, sys.spin_torque_norm())
        };
        let conserving = norm <= 1e-12;
        let mut checks = pv_checks("sigma_torque", &torque, cfg);
        let mut results = json!({ "sigma_torque": torque, "gap": gap, "spin_torque_norm": norm });
        if conserving {
            checks.push(Check::at_most("conserving_torque", torque.value.abs(), cfg.checks.conserving_torque));
        } else {
            let fit = fit_exponential_decay(&strip_decay_data(&torque), cfg.checks.confidence)?;
            checks.push(Check::holds("interface_localization", fit.decaying));
            results["decay_fit"] = to_json(&fit)?;
        }
        return Ok(Outcome { results, checks, tables: vec![strip_table("strip_torque_profile", &torque)] });
    }
    let model = cfg.bulk_model()?;
    let (sys, ext) = bulk_system(&model, cfg)?;
    let step = (cfg.conductance.step_multiplier as u32 * model.lattice().a1) as f64;
    let torque = torque_conductance(&sys, &cfg.switches.lambda2, step, &ext, &cfg.calculus, &cfg.conductance)?;
    let worst = interior_strips(&torque).map(|(_, t)| t.norm()).fold(0.0, f64::max);
    let tol = if model.spin_conserving() { cfg.checks.conserving_torque } else { cfg.checks.bulk_torque };
    Ok(Outcome {
        results: json!({ "bulk_torque": torque, "interior_max": worst, "spin_torque_norm": sys.spin_torque_norm() }),
        checks: vec![Check::at_most("bulk_torque_interior", worst, tol)],
        tables: vec![strip_table("strip_torque_profile", &torque)],
    })
}

fn run_chern(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.bulk_model()?;
    let sectors: &[SpinSector] = if model.spin_conserving() {
        &[SpinSector::Full, SpinSector::Up, SpinSector::Down]
    } else {
        &[SpinSector::Full]
    };
    let (sys, ext) = bulk_system(&model, cfg)?;
    let p = sys.projection_below(fermi(cfg, &ext));
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    let mut values = Vec::new();
    for &sector in sectors {
        let k = chern_k_space(&model, sector, None, cfg.conductance.k_grid)?;
        let r = chern_real_space(&p, &cfg.switches.lambda1, &cfg.switches.lambda2, sys.core(), sector)?;
        let name = format!("{sector:?}").to_lowercase();
        checks.push(Check::at_most(
            &format!("chern_{name}_agreement"),
            (r.value - k.value as f64).abs(),
            cfg.checks.quantization,
        ));
        values.push(k.value);
        entries.push(json!({ "sector": sector, "k_space": k, "real_space": r }));
    }
    if model.spin_conserving() && model.time_reversal_symmetric() {
        checks.push(Check::holds("chern_up_equals_minus_down", values[1] == -values[2]));
    }
    Ok(Outcome { results: json!({ "model": model, "chern": entries }), checks, tables: vec![] })
}

fn run_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.bulk_model()?;
    let grid = cfg.conductance.k_grid;
    let bounds = spectrum_bounds(&model, grid)?;
    let gap = band_gap(&model, grid, None);
    let h = BlochHamiltonian::new(&model);
    let bands = model.band_count();
    let mut cols = vec!["k_index".to_string(), "k1".into(), "k2".into()];
    cols.extend((0..bands).map(|b| format!("band_{b}")));
    let mut table = Table { name: "band_structure".into(), columns: cols, rows: Vec::new() };
    let corners = [[0.0, 0.0], [PI, 0.0], [PI, PI], [0.0, 0.0]];
    let per_leg = 40;
    let mut idx = 0;
    for leg in corners.windows(2) {
        for s in 0..per_leg {
            let t = s as f64 / per_leg as f64;
            let k = [leg[0][0] + t * (leg[1][0] - leg[0][0]), leg[0][1] + t * (leg[1][1] - leg[0][1])];
            let (e, _) = h.eigen(k)?;
            let mut row = vec![idx as f64, k[0], k[1]];
            row.extend(e);
            table.push(row);
            idx += 1;
        }
    }
    let checks = vec![Check::holds("half_filling_gap", gap.is_ok())];
    let gap_json = match &gap {
        Ok(g) => json!(g),
        Err(e) => json!(e.to_string()),
    };
    Ok(Outcome { results: json!({ "model": model, "bounds": bounds, "gap": gap_json }), checks, tables: vec![table] })
}

fn run_convergence(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.sample.sizes.len() < 2 {
        bail!(Config, "a size study needs at least two entries in sample.sizes");
    }
    let jm = cfg.junction_model()?;
    let mut table = Table::new(
        "residual_vs_size",
        &[
            "extent",
            "bic_residual",
            "bic_residual_uncorrected",
            "sigma_plus",
            "sigma_minus",
            "sigma_drift",
            "sigma_torque",
        ],
    );
    let mut strips = Table::new("strip_torque_profile", &["extent", "strip_n", "distance", "trace", "abs_trace"]);
    let mut reports = Vec::new();
    for &e in &cfg.sample.sizes {
        let r = verify_bic(&jm, &cfg.bic_setup([e, e]), &cfg.calculus, &cfg.conductance)?;
        table.push(vec![
            e,
            r.bic_residual,
            r.bic_residual_uncorrected,
            r.sigma_plus.value,
            r.sigma_minus.value,
            r.sigma_drift.value,
            r.sigma_torque.value,
        ]);
        for (d, (n, t)) in strip_decay_points(&r.sigma_torque).zip(&r.sigma_torque.trail.strip_traces) {
            strips.push(vec![e, *n as f64, d, t.re, t.norm()]);
        }
        reports.push(r);
    }
    let residuals: Vec<f64> = reports.iter().map(|r| r.bic_residual).collect();
    let worst_growth = residuals
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 {
                w[1] / w[0] - 1.0
            } else if w[1] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::at_most("residual_growth", worst_growth, cfg.checks.noise_band),
        Check::at_most("final_bic_residual", *residuals.last().unwrap(), cfg.checks.bic_residual),
    ];
    Ok(Outcome {
        results: json!({ "sizes": cfg.sample.sizes, "reports": reports }),
        checks,
        tables: vec![table, strips],
    })
}
