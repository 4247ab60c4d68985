//! Command line: `run`, `list-templates` and `schema`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Experiment, ExperimentConfig, OUTPUT_DIR_ENV, SCHEMA_VERSION};
use crate::experiments::{csv_columns, execute, RunResult};
use crate::templates::REGISTRY;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sclab",
    version,
    about = "Numerical checks for scale calculus, retracts and polyfold models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run experiment configurations; independent configurations run concurrently.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Overrides `output.dir` of every configuration.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
        /// Run configurations one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// List operator, map, retraction and chart templates.
    ListTemplates,
    /// Describe the configuration layout and the CSV columns of every experiment.
    Schema,
}

pub fn main_with(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    let code = match cli.command {
        Command::Run {
            configs,
            output_dir,
            sequential,
        } => run(&configs, output_dir.as_deref(), sequential, out, err),
        Command::ListTemplates => write_or_fail(list_templates(out), err),
        Command::Schema => write_or_fail(schema(out), err),
    };
    ExitCode::from(code)
}

fn write_or_fail(r: std::io::Result<()>, err: &mut dyn Write) -> u8 {
    match r {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn run(
    paths: &[PathBuf],
    output_dir: Option<&Path>,
    sequential: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        match ExperimentConfig::load(p) {
            Ok(c) => configs.push((c, p.parent().map(Path::to_path_buf).unwrap_or_default())),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let results: Vec<anyhow::Result<RunResult>> = if sequential || configs.len() == 1 {
        configs
            .iter()
            .map(|(c, base)| execute(c, base, output_dir))
            .collect()
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|(c, base)| s.spawn(move || execute(c, base, output_dir)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(anyhow::anyhow!("experiment panicked")))
                })
                .collect()
        })
    };
    let mut code = EXIT_PASS;
    for ((config, _), result) in configs.iter().zip(results) {
        match result {
            Ok(r) => {
                for c in &r.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    let _ = writeln!(out, "{tag} {}/{}: {}", r.name, c.name, c.detail);
                }
                let _ = writeln!(
                    out,
                    "wrote {} and {}",
                    r.paths.report.display(),
                    r.paths.csv.display()
                );
                if !r.passed && code == EXIT_PASS {
                    code = EXIT_CHECK_FAILED;
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e:#}", config.name);
                code = EXIT_CONFIG;
            }
        }
    }
    code
}

fn list_templates(out: &mut dyn Write) -> std::io::Result<()> {
    for t in REGISTRY {
        let params = if t.params.is_empty() { "-" } else { t.params };
        writeln!(
            out,
            "{:<11} {:<21} {:<48} {}",
            t.kind, t.name, params, t.description
        )?;
    }
    Ok(())
}

fn schema(out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "schema {SCHEMA_VERSION}")?;
    writeln!(out)?;
    writeln!(out, "configuration (JSON):")?;
    writeln!(out, "  schema      \"{SCHEMA_VERSION}\"")?;
    writeln!(out, "  name        report name, also the default file stem")?;
    writeln!(
        out,
        "  experiment  one of: {}",
        Experiment::NAMES.join(", ")
    )?;
    writeln!(
        out,
        "  params      experiment parameters; templates are objects tagged by \"template\""
    )?;
    writeln!(
        out,
        "  seed        u64, required by every experiment except degeneracy and tame"
    )?;
    writeln!(out, "  output      {{\"dir\": path (default sclab-out), \"stem\": file stem}}; {OUTPUT_DIR_ENV} overrides dir")?;
    writeln!(out)?;
    writeln!(out, "outputs per run: <stem>.json (deterministic report), <stem>.csv (plot data), <stem>.meta.json (timing)")?;
    writeln!(
        out,
        "exit codes: 0 all checks pass, 1 a check failed, 2 configuration or IO error"
    )?;
    writeln!(out)?;
    writeln!(out, "CSV columns:")?;
    for name in Experiment::NAMES {
        let cols = csv_columns(name).unwrap_or(&[]);
        writeln!(out, "  {name:<14} {}", cols.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli =
            Cli::try_parse_from(["sclab", "run", "a.json", "b.json", "--sequential"]).unwrap();
        assert!(
            matches!(cli.command, Command::Run { ref configs, sequential: true, .. } if configs.len() == 2)
        );
        assert!(Cli::try_parse_from(["sclab", "run"]).is_err());
    }

    #[test]
    fn schema_lists_every_experiment() {
        let mut buf = Vec::new();
        schema(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for name in Experiment::NAMES {
            assert!(text.contains(&format!("  {name:<14} ")), "{name}");
        }
    }
}
