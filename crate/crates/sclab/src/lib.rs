//! Experiment driver for `sclab-core`: typed configurations, report and
//! vector file formats, a template registry and the `sclab` command line.
//!
//! A configuration names one experiment and its parameters. Running it
//! produces a deterministic JSON report with one pass/fail line per check,
//! a CSV table for plotting and a separate file with timings.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod formats;
pub mod templates;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{execute, run_experiment, Check, Context, Outcome};
