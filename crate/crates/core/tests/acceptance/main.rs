//! Acceptance criteria at full size.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any fails.
//! `ACCEPTANCE_CRITERIA=3,5` restricts the run to the listed criteria.

mod bulk;
mod junction;
mod small;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::Instant;

use spinbic::config::RunConfig;
use spinbic::pipeline::{run, Command};
use spinbic::record::RunRecord;

/// Outcome of one criterion.
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub fn preset(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name);
    RunConfig::load(&path).unwrap_or_else(|e| panic!("preset {}: {e}", path.display()))
}

/// Results shared between criteria.
#[derive(Default)]
pub struct Cache {
    bulk: HashMap<String, (bool, bulk::BulkStudy)>,
    convergence: Option<RunRecord>,
}

impl Cache {
    /// Bulk study of a preset; `full` adds the invariance variants and the torque trail.
    pub fn bulk(&mut self, name: &str, full: bool) -> &bulk::BulkStudy {
        let stale = self.bulk.get(name).is_none_or(|(have, _)| full && !have);
        if stale {
            self.bulk.insert(name.to_string(), (full, bulk::study(name, full)));
        }
        &self.bulk[name].1
    }

    /// Size study of the spin-mixing junction.
    pub fn convergence(&mut self) -> &RunRecord {
        self.convergence.get_or_insert_with(|| run(Command::Convergence, &preset(junction::MIXING)).unwrap())
    }
}

fn selected() -> BTreeSet<u32> {
    match std::env::var("ACCEPTANCE_CRITERIA") {
        Ok(list) if !list.trim().is_empty() => {
            list.split(',').map(|s| s.trim().parse().unwrap_or_else(|_| panic!("bad criterion id '{s}'"))).collect()
        }
        _ => (1..=11).collect(),
    }
}

type Criterion = (u32, &'static str, fn(&mut Cache) -> Verdict);

fn main() {
    spinbic::linalg::pin_sequential();
    let criteria: [Criterion; 11] = [
        (1, "engine equivalence", |_| small::engine_equivalence()),
        (2, "off-diagonality", |_| small::off_diagonality()),
        (3, "spin Chern quantization", bulk::quantization),
        (4, "Z2 parity", bulk::z2_parity),
        (5, "invariance", bulk::invariance),
        (6, "vanishing bulk torque", bulk::bulk_torque),
        (7, "interface localization", junction::localization),
        (8, "identity, spin conserving", junction::conserving),
        (9, "identity, spin mixing", junction::nonconserving),
        (10, "principal-value trace", |_| small::pv_trace()),
        (11, "determinism", junction::determinism),
    ];
    let wanted = selected();
    let mut cache = Cache::default();
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run(&mut cache);
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name}: {} ({:.1} s)", v.detail, start.elapsed().as_secs_f64());
        if !v.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} selected criteria passed", wanted.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
