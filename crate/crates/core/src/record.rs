//! Run records (JSON) and data series (CSV), each stamped with the configuration hash.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{bail, Result};

/// A tolerance check that contributes to the exit status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `flag` holds; `value` is `1` or `0`.
    pub fn holds(name: &str, flag: bool) -> Self {
        Self { name: name.to_string(), value: flag as u8 as f64, tolerance: 1.0, passed: flag }
    }
}

/// Numeric series written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Run-dependent fields left out of determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub tables: Vec<Table>,
    pub meta: RunMeta,
}

impl RunRecord {
    pub fn new(
        command: &str,
        config: &RunConfig,
        results: serde_json::Value,
        checks: Vec<Check>,
        tables: Vec<Table>,
        wall_time_s: f64,
    ) -> Self {
        let timestamp =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            tool: "spinbic".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config.hash(),
            config: config.clone(),
            passed: checks.iter().all(|c| c.passed),
            results,
            checks,
            tables,
            meta: RunMeta { timestamp, wall_time_s },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// JSON with the run-dependent fields removed; equal for reruns of one configuration.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("meta");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn table(&self, name: &str) -> Result<&Table> {
        match self.tables.iter().find(|t| t.name == name) {
            Some(t) => Ok(t),
            None => bail!(Config, "record of '{}' has no series '{name}'", self.command),
        }
    }
}

/// Writes one table as CSV with a `# config_hash=...` comment line.
pub fn write_table(table: &Table, config_hash: &str, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# config_hash={config_hash}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<command>.json` and `<command>_<series>.csv` into `dir`, all identical
/// for reruns of one configuration, and the timing in `<command>_run.json`.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{}.json", record.command));
    std::fs::write(&json, record.deterministic_json()? + "\n")?;
    written.push(json);
    let run = dir.join(format!("{}_run.json", record.command));
    let meta = serde_json::json!({ "config_hash": record.config_hash, "meta": record.meta });
    std::fs::write(&run, serde_json::to_string_pretty(&meta)? + "\n")?;
    written.push(run);
    for t in &record.tables {
        let path = dir.join(format!("{}_{}.csv", record.command, t.name));
        write_table(t, &record.config_hash, &path)?;
        written.push(path);
    }
    Ok(written)
}
