//! Junction criteria: the bulk-interface identity and interface localization.

use std::path::PathBuf;

use spinbic::conductance::verify_bic;
use spinbic::pipeline::{run, Command};
use spinbic::record::{write_outputs, RunRecord};

use crate::{preset, Cache, Verdict};

pub const CONSERVING: &str = "haldane_vs_trivial.toml";
pub const MIXING: &str = "bhz_breaking_vs_trivial.toml";
/// Half-width of the 30×30 sample.
const EXTENT: f64 = 15.0;

pub fn conserving(_: &mut Cache) -> Verdict {
    let cfg = preset(CONSERVING);
    let r = verify_bic(&cfg.junction_model().unwrap(), &cfg.bic_setup([EXTENT; 2]), &cfg.calculus, &cfg.conductance)
        .unwrap();
    let torque = r.sigma_torque.value.abs();
    Verdict::new(
        r.bic_residual <= 5e-2 && torque <= 1e-10,
        format!(
            "σ₊ = {:.6}, σ₋ = {:.6}, σ_drift = {:.6}, |σ_torque| = {torque:.1e}, residual {:.2e}",
            r.sigma_plus.value, r.sigma_minus.value, r.sigma_drift.value, r.bic_residual
        ),
    )
}

/// Rows of `table` whose first column equals `extent`.
fn rows_at<'a>(record: &'a RunRecord, table: &str, extent: f64) -> impl Iterator<Item = &'a Vec<f64>> {
    record.table(table).unwrap().rows.iter().filter(move |r| r[0] == extent)
}

pub fn nonconserving(cache: &mut Cache) -> Verdict {
    let record = cache.convergence();
    let rows: Vec<&Vec<f64>> = record.table("residual_vs_size").unwrap().rows.iter().collect();
    let residuals: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    let at_30 = rows_at(record, "residual_vs_size", EXTENT).next().unwrap()[1];
    let growth = residuals.windows(2).map(|w| w[1].1 / w[0].1 - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let listing: Vec<String> =
        residuals.iter().map(|(e, r, u)| format!("{}×{}: {r:.2e} (plain trails {u:.2e})", 2.0 * e, 2.0 * e)).collect();
    Verdict::new(
        at_30 <= 1e-1 && growth <= 0.2,
        format!("residuals {}; largest relative growth {growth:+.2}", listing.join(", ")),
    )
}

/// One torque run on the 30×30 junction; the pipeline fits the strip traces
/// against their distance from the interface, leaving out exact zeros.
pub fn localization(_: &mut Cache) -> Verdict {
    let record = run(Command::Torque, &preset(MIXING)).unwrap();
    let fit = &record.results["decay_fit"];
    let num = |key: &str| fit[key].as_f64().unwrap();
    let interval = |k: usize| fit["rate_interval"][k].as_f64().unwrap();
    Verdict::new(
        fit["decaying"].as_bool().unwrap(),
        format!(
            "|t_n| ≈ {:.2e} e^(-c d) with c = {:.3}, 95% interval [{:.3}, {:.3}] from {} strips",
            num("prefactor"),
            num("rate"),
            interval(0),
            interval(1),
            fit["points"]
        ),
    )
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spinbic-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn written(record: &RunRecord, tag: &str) -> Vec<(String, Vec<u8>)> {
    let dir = scratch(tag);
    let mut files: Vec<(String, Vec<u8>)> = write_outputs(record, &dir)
        .unwrap()
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    let _ = std::fs::remove_dir_all(&dir);
    files
}

pub fn determinism(cache: &mut Cache) -> Verdict {
    let first = cache.convergence().clone();
    let second = run(Command::Convergence, &preset(MIXING)).unwrap();
    let same_json = first.deterministic_json().unwrap() == second.deterministic_json().unwrap();
    let (a, b) = (written(&first, "a"), written(&second, "b"));
    let same_csv = a == b;
    Verdict::new(
        same_json && same_csv,
        format!(
            "rerun of {MIXING}: JSON {}, {} CSV files {}, config hash {}",
            if same_json { "identical" } else { "differs" },
            a.len(),
            if same_csv { "identical" } else { "differ" },
            &first.config_hash[..12]
        ),
    )
}
