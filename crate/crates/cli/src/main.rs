use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinbic::calculus::Engine;
use spinbic::config::RunConfig;
use spinbic::models::ModelSpec;
use spinbic::pipeline::{self, Command};
use spinbic::record::write_outputs;

#[derive(Parser)]
#[command(name = "spinbic", version, about = "Spin conductances and the bulk-interface identity on finite lattices")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Bulk, drift and torque conductances of a junction and the identity residual.
    VerifyBic(Common),
    /// Bulk spin conductance of one model, with its Kubo and Chern-number values.
    BulkConductance(Common),
    /// Drift conductance of in-gap interface modes.
    Drift(Common),
    /// Torque conductance of a junction, or bulk torque strip traces of one model.
    Torque(Common),
    /// Chern numbers from plaquettes in k-space and from the real-space formula.
    Chern(Common),
    /// Band structure, spectrum bounds and half-filling gap.
    Spectrum(Common),
    /// Identity residual over the sizes listed in `sample.sizes`.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resolvent engine: spectral, quadrature or cross-check.
    #[arg(long)]
    engine: Option<Engine>,
    /// Seed for the interface perturbation and defects.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Model preset for single-model commands, replacing `[model]`.
    #[arg(long)]
    model: Option<String>,
    /// Model parameter override `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in '{s}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn configure(c: &Common) -> spinbic::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(e) = c.engine {
        cfg.calculus.engine = e;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(name) = &c.model {
        cfg.model = Some(ModelSpec::new(name, &[]));
    }
    if !c.params.is_empty() {
        let Some(m) = cfg.model.as_mut() else {
            return Err(spinbic::Error::Config("--param needs a model (--model or [model])".into()));
        };
        for (k, v) in &c.params {
            m.params.insert(k.clone(), *v);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::VerifyBic(c) => (Command::VerifyBic, c),
        Sub::BulkConductance(c) => (Command::BulkConductance, c),
        Sub::Drift(c) => (Command::Drift, c),
        Sub::Torque(c) => (Command::Torque, c),
        Sub::Chern(c) => (Command::Chern, c),
        Sub::Spectrum(c) => (Command::Spectrum, c),
        Sub::Convergence(c) => (Command::Convergence, c),
    };
    spinbic::linalg::pin_sequential();
    let result = configure(common)
        .and_then(|cfg| pipeline::run(command, &cfg))
        .and_then(|record| write_outputs(&record, &common.out).map(|files| (record, files)));
    match result {
        Ok((record, files)) => {
            for c in &record.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark} {:<32} {:>14.6e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            println!("config_hash {}", record.config_hash);
            if record.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
