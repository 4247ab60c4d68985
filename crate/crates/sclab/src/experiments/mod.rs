//! Experiment runners and report assembly.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
use crate::formats::{write_atomic, OutputPaths, Table};

mod cartan;
mod chain_rule;
mod degeneracy;
mod fredholm;
mod shift_map;
mod splicing;
mod strong_bundle;
mod tame;
mod verify_scale;

/// One named pass/fail line of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Result of running an experiment in memory.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub table: Table,
    pub data: serde_json::Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Seed and directory for resolving relative input paths.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub base_dir: PathBuf,
}

pub fn run_experiment(experiment: &Experiment, ctx: &Context) -> Result<Outcome> {
    match experiment {
        Experiment::VerifyScale(p) => verify_scale::run(p, ctx),
        Experiment::ShiftMap(p) => shift_map::run(p),
        Experiment::Fredholm(p) => fredholm::run(p, ctx),
        Experiment::ChainRule(p) => chain_rule::run(p, ctx),
        Experiment::Splicing(p) => splicing::run(p, ctx),
        Experiment::Degeneracy(p) => degeneracy::run(p),
        Experiment::Cartan(p) => cartan::run(p, ctx),
        Experiment::Tame(p) => tame::run(p),
        Experiment::StrongBundle(p) => strong_bundle::run(p, ctx),
    }
}

/// CSV columns written by each experiment.
pub fn csv_columns(experiment: &str) -> Option<&'static [&'static str]> {
    Some(match experiment {
        "verify-scale" => verify_scale::COLUMNS,
        "shift-map" => shift_map::COLUMNS,
        "fredholm" => fredholm::COLUMNS,
        "chain-rule" => chain_rule::COLUMNS,
        "splicing" => splicing::COLUMNS,
        "degeneracy" => degeneracy::COLUMNS,
        "cartan" => cartan::COLUMNS,
        "tame" => tame::COLUMNS,
        "strong-bundle" => strong_bundle::COLUMNS,
        _ => return None,
    })
}

/// The deterministic part of a run: no timings, no absolute paths.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema: &'static str,
    pub name: &'a str,
    pub experiment: &'static str,
    pub seed: Option<u64>,
    pub passed: bool,
    pub checks: &'a [Check],
    pub data: &'a serde_json::Value,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    schema: &'static str,
    name: &'a str,
    started_unix_seconds: f64,
    elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub paths: OutputPaths,
}

/// Runs one validated configuration and writes its report, CSV and timing
/// files into the output directory.
pub fn execute(
    config: &ExperimentConfig,
    base_dir: &Path,
    output_dir: Option<&Path>,
) -> Result<RunResult> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let ctx = Context {
        seed: config.seed(),
        base_dir: base_dir.to_path_buf(),
    };
    let outcome = run_experiment(&config.experiment, &ctx)?;
    let elapsed = clock.elapsed().as_secs_f64();

    let passed = outcome.passed();
    let report = Report {
        schema: SCHEMA_VERSION,
        name: &config.name,
        experiment: config.experiment.name(),
        seed: config.seed,
        passed,
        checks: &outcome.checks,
        data: &outcome.data,
    };
    let meta = Meta {
        schema: SCHEMA_VERSION,
        name: &config.name,
        started_unix_seconds: started,
        elapsed_seconds: elapsed,
    };
    let paths = OutputPaths::new(&config.output_dir(output_dir), &config.stem());
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_atomic(&paths.report, &json)?;
    write_atomic(&paths.csv, &outcome.table.to_csv()?)?;
    write_atomic(&paths.meta, &serde_json::to_vec_pretty(&meta)?)?;
    Ok(RunResult {
        name: config.name.clone(),
        passed,
        checks: outcome.checks,
        paths,
    })
}

/// `|a − b| ≤ tol`, written for report details.
pub(crate) fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub(crate) fn to_value(v: &impl Serialize) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}
