//! Reference scenarios shipped with the crate.
//!
//! The numbers live in `fixtures/*.json` next to the manifest and are
//! embedded at compile time. Deployments happen in a disc with the area of a
//! 5 km by 5 km town centre square.

use serde::{Deserialize, Serialize};

use crate::config::{ChannelConfig, ScenarioConfig, TierSpec};
use crate::model::{db_to_linear, Scenario, UserDensity};

pub const TABLE2_JSON: &str = include_str!("../fixtures/table2.json");
pub const TABLE3_JSON: &str = include_str!("../fixtures/table3.json");
pub const FIG3_JSON: &str = include_str!("../fixtures/fig3.json");

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 3] = ["table2", "table3", "fig3"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureRow {
    pub name: String,
    /// Published overall coverage for this row.
    pub expected: f64,
    pub tiers: Vec<TierSpec>,
}

/// A family of scenarios sharing users, channel and region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFixture {
    pub description: String,
    pub gamma_db: f64,
    pub channel: ChannelConfig,
    pub users: UserDensity,
    pub region_radius_m: f64,
    pub rows: Vec<FixtureRow>,
}

impl TableFixture {
    pub fn gamma(&self) -> f64 {
        db_to_linear(self.gamma_db)
    }

    pub fn row(&self, name: &str) -> Option<&FixtureRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn config(&self, row: &FixtureRow) -> ScenarioConfig {
        ScenarioConfig {
            users: self.users,
            channel: self.channel,
            tiers: row.tiers.clone(),
            region_radius_m: Some(self.region_radius_m),
        }
    }

    pub fn scenario(&self, row: &FixtureRow) -> Scenario {
        self.config(row).to_scenario().expect("fixture scenarios are valid")
    }

    pub fn scenario_named(&self, name: &str) -> Scenario {
        let row = self.row(name).unwrap_or_else(|| panic!("no fixture row `{name}`"));
        self.scenario(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub expected: f64,
    pub tiers: Vec<TierSpec>,
}

/// The two-tier homogeneity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFixture {
    pub description: String,
    pub channel: ChannelConfig,
    pub users: UserDensity,
    pub region_radius_m: f64,
    /// Tier template; the betas are placeholders overwritten by the sweep.
    pub tiers: Vec<TierSpec>,
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_points: usize,
    pub gamma1_db: f64,
    pub gamma2_db: f64,
    pub floor: f64,
    pub n_max: f64,
    /// Fixed second-tier beta of the one-dimensional slice.
    pub slice_beta2: f64,
    pub expected_optimum: f64,
    pub baseline: Baseline,
}

impl SweepFixture {
    pub fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            users: self.users,
            channel: self.channel,
            tiers: self.tiers.clone(),
            region_radius_m: Some(self.region_radius_m),
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.config().to_scenario().expect("fixture scenarios are valid")
    }

    pub fn baseline_scenario(&self) -> Scenario {
        ScenarioConfig {
            tiers: self.baseline.tiers.clone(),
            ..self.config()
        }
        .to_scenario()
        .expect("fixture scenarios are valid")
    }

    /// Log-spaced beta values from `beta_min` to `beta_max`.
    pub fn beta_grid(&self) -> Vec<f64> {
        log_space(self.beta_min, self.beta_max, self.grid_points)
    }
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn table2() -> TableFixture {
    serde_json::from_str(TABLE2_JSON).expect("embedded fixture parses")
}

pub fn table3() -> TableFixture {
    serde_json::from_str(TABLE3_JSON).expect("embedded fixture parses")
}

pub fn fig3() -> SweepFixture {
    serde_json::from_str(FIG3_JSON).expect("embedded fixture parses")
}

/// Raw JSON of a named fixture.
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "table2" => Some(TABLE2_JSON),
        "table3" => Some(TABLE3_JSON),
        "fig3" => Some(FIG3_JSON),
        _ => None,
    }
}

pub fn three_tier_table2() -> Scenario {
    table2().scenario_named("three-tier")
}

pub fn uniform_table2() -> Scenario {
    table2().scenario_named("uniform")
}

/// One-tier row at altitude 50, 100 or 150 m.
pub fn one_tier_table2(altitude_m: u32) -> Scenario {
    table2().scenario_named(&format!("one-tier-{altitude_m}m"))
}
