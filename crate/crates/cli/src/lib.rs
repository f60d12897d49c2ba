//! Experiment runner behind the `aerocov` binary.
//!
//! Every command reads one JSON experiment file, writes a CSV table and a
//! JSON manifest recording the config hash, seeds, tolerances and timing.
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error,
//! 3 infeasible optimization, 4 failed validation.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::fixtures::FixtureOutput;
use crate::commands::{Outcome, Overrides};
use crate::config::MethodArg;
pub use crate::error::{CliError, CliResult};
use crate::output::{manifest_path, sha256_hex, write_file, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "aerocov", version, about = "Coverage of multi-tier UAV networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// CSV destination; the manifest goes next to it. Without it the CSV is
    /// printed and the manifest goes to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides every seed in the experiment file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for the parallel engines.
    #[arg(long, global = true, env = "AEROCOV_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_parser = clap::value_parser!(MethodArg))]
    pub method: Option<MethodArg>,

    /// Outer relative tolerance of the analytic integrals.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

impl clap::ValueEnum for MethodArg {
    fn value_variants<'a>() -> &'a [Self] {
        &[MethodArg::Exact, MethodArg::Approx, MethodArg::Mc]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            MethodArg::Exact => "exact",
            MethodArg::Approx => "approx",
            MethodArg::Mc => "mc",
        }))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local coverage against user offset.
    LocalCurve,
    /// Coverage averaged over the user distribution.
    Overall,
    /// Compare the analytic engine with simulation.
    Validate,
    /// Search per-tier homogeneity under count and floor constraints.
    Optimize,
    /// List the shipped fixtures, print one, or regress its rows.
    Fixtures {
        name: Option<String>,
        /// Compute every row's overall coverage next to its published value.
        #[arg(long)]
        regress: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LocalCurve => "local-curve",
            Command::Overall => "overall",
            Command::Validate => "validate",
            Command::Optimize => "optimize",
            Command::Fixtures { .. } => "fixtures",
        }
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<usize> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Runs one invocation end to end, writing its outputs.
pub fn run(cli: &Cli) -> CliResult<()> {
    let threads = configure_threads(cli.threads)?;
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("--tolerance must lie in (0, 1), got {t}")));
        }
    }
    let ov = Overrides {
        seed: cli.seed,
        method: cli.method,
        tolerance: cli.tolerance,
    };
    let started = Instant::now();

    let (outcome, loaded) = match &cli.command {
        Command::Fixtures { name, regress } => match commands::fixtures::run(name.as_deref(), *regress, &ov)? {
            FixtureOutput::Json(text) => return emit(cli.out.as_ref(), text.as_bytes()),
            FixtureOutput::Table(o) => (o, None),
        },
        cmd => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| CliError::Usage(format!("{} needs --config PATH", cmd.name())))?;
            let loaded = config::load(path)?;
            let outcome = match cmd {
                Command::LocalCurve => commands::local_curve::run(&loaded, &ov)?,
                Command::Overall => commands::overall::run(&loaded, &ov)?,
                Command::Validate => commands::validate::run(&loaded, &ov)?,
                Command::Optimize => commands::optimize::run(&loaded, &ov)?,
                Command::Fixtures { .. } => unreachable!(),
            };
            (outcome, Some(loaded))
        }
    };

    let Outcome {
        table,
        seeds,
        provenance,
        flagged,
        summary,
        failure,
    } = outcome;
    let csv = table.to_bytes()?;
    let manifest = RunManifest {
        tool: "aerocov".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        config_path: loaded.as_ref().map(|l| l.path.clone()),
        config_sha256: loaded.as_ref().map(|l| sha256_hex(&l.bytes)),
        seeds,
        threads,
        wall_time_s: started.elapsed().as_secs_f64(),
        provenance,
        output: cli.out.clone(),
        output_sha256: sha256_hex(&csv),
        rows: table.rows.len(),
        flagged_rows: flagged,
        summary,
    };
    let manifest_json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    emit(cli.out.as_ref(), &csv)?;
    match &cli.out {
        Some(out) => write_file(&manifest_path(out), &manifest_json)?,
        None => {
            let mut err = std::io::stderr().lock();
            let _ = err.write_all(&manifest_json);
            let _ = err.write_all(b"\n");
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, bytes),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "aerocov",
            "validate",
            "--config",
            "x.json",
            "--seed",
            "7",
            "--method",
            "exact",
            "--tolerance",
            "1e-5",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Validate));
        assert_eq!(cli.seed, Some(7));
        assert_eq!(cli.method, Some(MethodArg::Exact));
        assert!(Cli::try_parse_from(["aerocov", "overall", "--method", "fast"]).is_err());
    }

    #[test]
    fn missing_config_is_usage_error() {
        let cli = Cli::try_parse_from(["aerocov", "overall"]).unwrap();
        assert_eq!(run(&cli).unwrap_err().exit_code(), CliError::EXIT_CONFIG);
    }
}
