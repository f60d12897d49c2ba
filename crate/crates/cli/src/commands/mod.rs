//! One module per subcommand. Each returns an [`Outcome`]; writing files and
//! manifests is left to the caller.

pub mod fixtures;
pub mod local_curve;
pub mod optimize;
pub mod overall;
pub mod validate;

use aerocov::analytic::{AnalyticMethod, AnalyticOptions};
use aerocov::mc::SimConfig;

use crate::config::{LoadedConfig, McBlock, MethodArg};
use crate::error::{CliError, CliResult};
use crate::output::{Provenance, Table};

/// Flags shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub method: Option<MethodArg>,
    /// Outer relative tolerance of the analytic engine.
    pub tolerance: Option<f64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub seeds: Vec<u64>,
    pub provenance: Vec<Provenance>,
    pub flagged: usize,
    pub summary: serde_json::Value,
    /// Raised after the outputs are written.
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn new(table: Table) -> Self {
        Outcome {
            table,
            seeds: Vec::new(),
            provenance: Vec::new(),
            flagged: 0,
            summary: serde_json::Value::Null,
            failure: None,
        }
    }
}

pub(crate) fn analytic_options(
    cfg: &LoadedConfig,
    base: AnalyticOptions,
    ov: &Overrides,
) -> CliResult<AnalyticOptions> {
    let opts = cfg.config.options.resolve(base, ov.tolerance);
    opts.validate().map_err(|e| CliError::Config {
        path: cfg.path.clone(),
        message: format!("options: {e}"),
    })?;
    Ok(opts)
}

pub(crate) fn analytic_method(m: MethodArg) -> Option<AnalyticMethod> {
    match m {
        MethodArg::Exact => Some(AnalyticMethod::Exact),
        MethodArg::Approx => Some(AnalyticMethod::Approx),
        MethodArg::Mc => None,
    }
}

pub(crate) fn sim_config(block: &McBlock, ov: &Overrides) -> SimConfig {
    SimConfig::new(ov.seed.unwrap_or(block.seed), block.trials).with_sampling(block.sampling)
}

pub(crate) fn analytic_provenance(method: AnalyticMethod, opts: &AnalyticOptions) -> Provenance {
    Provenance {
        method: aerocov::analytic::Method::from(method).label().into(),
        analytic: Some(*opts),
        ..Default::default()
    }
}

pub(crate) fn mc_provenance(sim: &SimConfig) -> Provenance {
    Provenance {
        method: "mc".into(),
        mc_trials: Some(sim.trials),
        sampling: Some(sim.sampling),
        ..Default::default()
    }
}

/// Non-convergence is reported on the row; anything else aborts.
pub(crate) fn flag_quadrature(r: aerocov::Result<f64>) -> CliResult<Result<f64, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(aerocov::Error::Quadrature(msg)) => Ok(Err(format!("not converged: {msg}"))),
        Err(e) => Err(e.into()),
    }
}
