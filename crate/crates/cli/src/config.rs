//! Experiment files.
//!
//! One JSON document names a scenario and carries a block per command. Every
//! struct rejects unknown keys, so a typo fails before any computation.

use std::path::{Path, PathBuf};

use aerocov::analytic::AnalyticOptions;
use aerocov::config::ScenarioConfig;
use aerocov::fixtures;
use aerocov::mc::SamplingPath;
use aerocov::model::Scenario;
use aerocov::optimize::{AltMaxSettings, LambdaRule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Where the scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ScenarioSource {
    /// A shipped fixture. Table fixtures need a row; `fig3` takes `null`
    /// for the swept template or `"baseline"`.
    Fixture {
        name: String,
        row: Option<String>,
    },
    /// A scenario JSON file, relative to the experiment file.
    File(PathBuf),
    Inline(ScenarioConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Exact,
    Approx,
    Mc,
}

impl std::str::FromStr for MethodArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(MethodArg::Exact),
            "approx" => Ok(MethodArg::Approx),
            "mc" => Ok(MethodArg::Mc),
            _ => Err(format!("unknown method `{s}` (expected exact, approx or mc)")),
        }
    }
}

impl std::fmt::Display for MethodArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MethodArg::Exact => "exact",
            MethodArg::Approx => "approx",
            MethodArg::Mc => "mc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ZRange {
    /// `start, start + step, ...` up to and including `stop` (with a small
    /// allowance for rounding).
    pub fn points(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.stop < self.start {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Monte-Carlo settings shared by the blocks that simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalCurveBlock {
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub z_range: Option<ZRange>,
    pub gamma_db: f64,
    #[serde(default)]
    pub method: Option<MethodArg>,
    /// Simulated points next to the analytic curve.
    #[serde(default)]
    pub mc_overlay: Option<McBlock>,
}

impl LocalCurveBlock {
    pub fn offsets(&self) -> CliResult<Vec<f64>> {
        let z = match (&self.z, &self.z_range) {
            (Some(z), None) => z.clone(),
            (None, Some(r)) => r.points(),
            (Some(_), Some(_)) => return Err(CliError::Usage("local_curve: give `z` or `z_range`, not both".into())),
            (None, None) => {
                return Err(CliError::Usage(
                    "local_curve: one of `z` or `z_range` is required".into(),
                ))
            }
        };
        if z.is_empty() {
            return Err(CliError::Usage("local_curve: the list of user offsets is empty".into()));
        }
        check_offsets("local_curve.z", &z)?;
        Ok(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverallBlock {
    pub gamma_db: f64,
    #[serde(default)]
    pub method: Option<MethodArg>,
    /// Needed when the method is `mc`.
    #[serde(default)]
    pub mc: Option<McBlock>,
}

/// Gap tolerances of the oracle suite. Each check passes when the gap is
/// within its tolerance plus the 95% sampling half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapTolerances {
    pub coverage: f64,
    pub ks: f64,
    pub association: f64,
    pub laplace: f64,
}

impl Default for GapTolerances {
    fn default() -> Self {
        GapTolerances {
            coverage: 0.03,
            ks: 0.01,
            association: 0.02,
            laplace: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateBlock {
    pub z: Vec<f64>,
    pub gamma_db: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingPath,
    #[serde(default)]
    pub tolerances: GapTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

/// Alternate-maximization refinement. Without `start` it begins at the
/// grid optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternateBlock {
    /// Initial β per tier; `null` leaves a tier empty.
    #[serde(default)]
    pub start: Option<Vec<Option<f64>>>,
    #[serde(default)]
    pub settings: Option<AltMaxSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeBlock {
    pub gamma1_db: f64,
    pub gamma2_db: f64,
    pub n_max: f64,
    /// Local coverage floor; absent or `null` means no floor.
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub z_grid: Option<Vec<f64>>,
    /// The same axis for every tier.
    #[serde(default)]
    pub grid: Option<LogAxis>,
    /// One explicit axis per tier.
    #[serde(default)]
    pub axes: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub lambda_rule: LambdaRule,
    #[serde(default)]
    pub alternate: Option<AlternateBlock>,
}

/// Analytic tolerances; any field left out keeps the engine default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsBlock {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub laplace_rel_tol: Option<f64>,
    #[serde(default)]
    pub profile_rel_tol: Option<f64>,
    #[serde(default)]
    pub residual_mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Default,
    Fast,
    Precise,
}

impl OptionsBlock {
    pub fn resolve(&self, base: AnalyticOptions, cli_tol: Option<f64>) -> AnalyticOptions {
        let mut o = match self.preset {
            Some(Preset::Default) => AnalyticOptions::default(),
            Some(Preset::Fast) => AnalyticOptions::fast(),
            Some(Preset::Precise) => AnalyticOptions::precise(),
            None => base,
        };
        if let Some(t) = cli_tol.or(self.rel_tol) {
            o.quad = o.quad.with_rel_tol(t);
        }
        if let Some(t) = self.laplace_rel_tol {
            o.laplace_rel_tol = t;
        }
        if let Some(t) = self.profile_rel_tol {
            o.profile_rel_tol = t;
        }
        if let Some(t) = self.residual_mass {
            o.residual_mass = t;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSource,
    #[serde(default)]
    pub options: OptionsBlock,
    #[serde(default)]
    pub local_curve: Option<LocalCurveBlock>,
    #[serde(default)]
    pub overall: Option<OverallBlock>,
    #[serde(default)]
    pub validate: Option<ValidateBlock>,
    #[serde(default)]
    pub optimize: Option<OptimizeBlock>,
}

/// A parsed experiment file with its raw bytes, for hashing.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub config: ExperimentConfig,
}

fn config_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> CliResult<T> {
    serde_json::from_slice(bytes).map_err(|e| config_error(path, e.to_string()))
}

pub fn load(path: &Path) -> CliResult<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_json(path, &bytes)?;
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        bytes,
        config,
    })
}

impl LoadedConfig {
    pub fn from_str(path: impl Into<PathBuf>, text: &str) -> CliResult<Self> {
        let path = path.into();
        let config = parse_json(&path, text.as_bytes())?;
        Ok(LoadedConfig {
            path,
            bytes: text.as_bytes().to_vec(),
            config,
        })
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let cfg = match &self.config.scenario {
            ScenarioSource::Inline(cfg) => cfg.clone(),
            ScenarioSource::File(rel) => {
                let full = self.path.parent().unwrap_or(Path::new(".")).join(rel);
                let bytes = std::fs::read(&full).map_err(|source| CliError::Io {
                    path: full.clone(),
                    source,
                })?;
                parse_json::<ScenarioConfig>(&full, &bytes)?
            }
            ScenarioSource::Fixture { name, row } => fixture_scenario(name, row.as_deref())
                .map_err(|m| config_error(&self.path, format!("scenario.fixture: {m}")))?,
        };
        cfg.to_scenario()
            .map_err(|e| config_error(&self.path, format!("scenario: {e}")))
    }

    pub fn require<'a, T>(&self, block: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        block
            .as_ref()
            .ok_or_else(|| config_error(&self.path, format!("missing `{name}` block")))
    }
}

fn fixture_scenario(name: &str, row: Option<&str>) -> Result<ScenarioConfig, String> {
    match name {
        "table2" | "table3" => {
            let table = if name == "table2" {
                fixtures::table2()
            } else {
                fixtures::table3()
            };
            let names = || {
                table
                    .rows
                    .iter()
                    .map(|r| r.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let row = row.ok_or_else(|| format!("`{name}` needs a row ({})", names()))?;
            let found = table
                .row(row)
                .ok_or_else(|| format!("`{name}` has no row `{row}` ({})", names()))?;
            Ok(table.config(found))
        }
        "fig3" => {
            let f = fixtures::fig3();
            match row {
                None => Ok(f.config()),
                Some("baseline") => Ok(ScenarioConfig {
                    tiers: f.baseline.tiers.clone(),
                    ..f.config()
                }),
                Some(other) => Err(format!("`fig3` has no row `{other}` (baseline)")),
            }
        }
        _ => Err(format!("unknown fixture `{name}` ({})", fixtures::NAMES.join(", "))),
    }
}

pub(crate) fn check_offsets(field: &str, z: &[f64]) -> CliResult<()> {
    match z.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        Some(v) => Err(CliError::Usage(format!(
            "{field}: offsets must be finite and non-negative, got {v}"
        ))),
        None => Ok(()),
    }
}
