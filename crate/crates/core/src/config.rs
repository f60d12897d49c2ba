//! Human-facing scenario descriptions in decibel units.
//!
//! These types are what JSON configs and fixtures contain. They convert to
//! the linear-unit [`Scenario`] used by every engine.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{db_to_linear, dbm_to_watts, linear_to_db, ChannelParams, Scenario, TierConfig, UserDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub m_los: u32,
    pub m_nlos: u32,
    pub noise_w: f64,
    pub env_a: f64,
    pub env_b: f64,
}

impl ChannelConfig {
    pub fn to_params(&self) -> ChannelParams {
        ChannelParams {
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            eta_los: db_to_linear(self.eta_los_db),
            eta_nlos: db_to_linear(self.eta_nlos_db),
            m_los: self.m_los,
            m_nlos: self.m_nlos,
            noise_w: self.noise_w,
            env_a: self.env_a,
            env_b: self.env_b,
            los_override: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSpec {
    pub altitude_m: f64,
    pub lambda: f64,
    pub beta: f64,
    pub power_dbm: f64,
}

impl TierSpec {
    pub fn to_tier(&self) -> TierConfig {
        TierConfig {
            altitude_m: self.altitude_m,
            lambda: self.lambda,
            beta: self.beta,
            power_w: dbm_to_watts(self.power_dbm),
        }
    }

    pub fn from_tier(tier: &TierConfig) -> Self {
        TierSpec {
            altitude_m: tier.altitude_m,
            lambda: tier.lambda,
            beta: tier.beta,
            power_dbm: linear_to_db(tier.power_w) + 30.0,
        }
    }
}

/// A complete scenario as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub users: UserDensity,
    pub channel: ChannelConfig,
    pub tiers: Vec<TierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_radius_m: Option<f64>,
}

impl ScenarioConfig {
    /// Converts to linear units and validates the result.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let scenario = Scenario {
            users: self.users,
            tiers: self.tiers.iter().map(TierSpec::to_tier).collect(),
            channel: self.channel.to_params(),
            region_radius_m: self.region_radius_m,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "users": {"lambda_u": 1e-3, "beta_u": 5e-3},
        "channel": {"alpha_los": 2, "alpha_nlos": 3, "eta_los_db": 0, "eta_nlos_db": -20,
                    "m_los": 2, "m_nlos": 1, "noise_w": 1e-7, "env_a": 4.88, "env_b": 0.429},
        "tiers": [{"altitude_m": 100, "lambda": 4e-5, "beta": 3.2e-3, "power_dbm": 7}]
    }"#;

    #[test]
    fn parses_and_converts() {
        let cfg: ScenarioConfig = serde_json::from_str(SAMPLE).unwrap();
        let sc = cfg.to_scenario().unwrap();
        assert!((sc.channel.eta_nlos - 0.01).abs() < 1e-15);
        assert!((sc.tiers[0].power_w - 10f64.powf(-2.3)).abs() < 1e-15);
        assert_eq!(sc.region_radius_m, None);
        let back = TierSpec::from_tier(&sc.tiers[0]);
        assert!((back.power_dbm - 7.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SAMPLE.replace("\"env_b\"", "\"env_c\": 1, \"env_b\"");
        assert!(serde_json::from_str::<ScenarioConfig>(&bad).is_err());
    }

    #[test]
    fn invalid_values_rejected_on_conversion() {
        let mut cfg: ScenarioConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.tiers[0].beta = 0.0;
        assert!(cfg.to_scenario().is_err());
        cfg.region_radius_m = Some(2000.0);
        assert!(cfg.to_scenario().is_ok());
    }
}
