//! Analytical coverage: tagged-UAV distance laws, association, interference
//! Laplace transforms and coverage probabilities.
//!
//! [`LocalModel`] is the workhorse. The free functions below are one-shot
//! conveniences that build a model for a single query.

mod coverage;
mod local;
pub mod polar;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ChannelParams, LinkClass, Scenario, TierConfig};
use crate::quadrature::QuadSpec;

pub(crate) use coverage::user_quantile;
pub use coverage::{overall_from_local, MAX_EXACT_SHAPE};
pub use local::{ring_density, LocalModel};

/// Which analytical coverage expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticMethod {
    /// Series of Laplace-transform derivatives; shapes up to
    /// [`MAX_EXACT_SHAPE`].
    Exact,
    /// Gamma-CDF bound with Laplace transforms only.
    Approx,
}

/// How a coverage value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Approx,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Approx => "approx",
            Method::MonteCarlo => "mc",
        }
    }
}

impl From<AnalyticMethod> for Method {
    fn from(m: AnalyticMethod) -> Self {
        match m {
            AnalyticMethod::Exact => Method::Exact,
            AnalyticMethod::Approx => Method::Approx,
        }
    }
}

/// One point of a coverage curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub z_u: f64,
    pub gamma: f64,
    pub value: f64,
    pub method: Method,
}

/// SINR threshold, either shared by all tiers or one per serving tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Common(f64),
    PerTier(Vec<f64>),
}

impl From<f64> for Threshold {
    fn from(g: f64) -> Self {
        Threshold::Common(g)
    }
}

impl Threshold {
    pub fn for_tier(&self, j: usize) -> f64 {
        match self {
            Threshold::Common(g) => *g,
            Threshold::PerTier(g) => g[j],
        }
    }

    pub(crate) fn check(&self, tiers: usize) -> Result<()> {
        let ok = |g: f64| g > 0.0 && g.is_finite();
        match self {
            Threshold::Common(g) if !ok(*g) => Err(invalid("gamma", format!("must be positive, got {g}"))),
            Threshold::PerTier(g) if g.len() != tiers => Err(invalid(
                "gamma",
                format!("{} per-tier thresholds for {tiers} tiers", g.len()),
            )),
            Threshold::PerTier(g) if !g.iter().all(|&x| ok(x)) => {
                Err(invalid("gamma", "per-tier thresholds must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Numerical settings of the analytic engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticOptions {
    /// Outer integrals over the serving distance and the user offset.
    pub quad: QuadSpec,
    /// Relative tolerance of the interference integrals.
    pub laplace_rel_tol: f64,
    /// Accuracy of the class-mass profiles relative to the tier's UAV count.
    pub profile_rel_tol: f64,
    /// Probability mass of the tagged distance left beyond the outer
    /// integration limit.
    pub residual_mass: f64,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        AnalyticOptions {
            quad: QuadSpec::coarse(),
            laplace_rel_tol: 1e-6,
            profile_rel_tol: 1e-8,
            residual_mass: 1e-5,
        }
    }
}

impl AnalyticOptions {
    /// Tight settings for property checks.
    pub fn precise() -> Self {
        AnalyticOptions {
            quad: QuadSpec::default(),
            laplace_rel_tol: 1e-10,
            profile_rel_tol: 1e-13,
            residual_mass: 1e-9,
        }
    }

    /// Loose settings for objective evaluations inside searches, accurate
    /// to about 1e-4 in coverage.
    pub fn fast() -> Self {
        AnalyticOptions {
            quad: QuadSpec::coarse().with_rel_tol(1e-3),
            laplace_rel_tol: 1e-4,
            profile_rel_tol: 1e-6,
            residual_mass: 1e-4,
        }
    }

    /// Default settings with the outer relative tolerance replaced.
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        let d = AnalyticOptions::default();
        AnalyticOptions {
            quad: d.quad.with_rel_tol(rel_tol),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        for (name, v) in [
            ("laplace_rel_tol", self.laplace_rel_tol),
            ("profile_rel_tol", self.profile_rel_tol),
            ("residual_mass", self.residual_mass),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Laplace argument at which the serving link just meets threshold `gamma`:
/// `m γ r^α / (η ρ)`.
pub fn mu_threshold(channel: &ChannelParams, tier: &TierConfig, class: LinkClass, r: f64, gamma: f64) -> f64 {
    f64::from(channel.shape(class)) * gamma * r.powf(channel.alpha(class)) / (channel.eta(class) * tier.power_w)
}

/// SINR threshold that guarantees `rate` bit/s over `bandwidth` Hz.
pub fn rate_threshold(rate: f64, bandwidth: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(invalid("rate", format!("must be non-negative, got {rate}")));
    }
    if !(bandwidth > 0.0) {
        return Err(invalid("bandwidth", format!("must be positive, got {bandwidth}")));
    }
    Ok((rate / bandwidth).exp2() - 1.0)
}

/// SINR threshold that guarantees an energy efficiency of `eff` bit/J for
/// a transmitter of `power_w` watts over `bandwidth` Hz.
pub fn energy_efficiency_threshold(eff: f64, power_w: f64, bandwidth: f64) -> Result<f64> {
    if !(eff >= 0.0) {
        return Err(invalid("eff", format!("must be non-negative, got {eff}")));
    }
    if !(power_w > 0.0) {
        return Err(invalid("power_w", format!("must be positive, got {power_w}")));
    }
    rate_threshold(eff * power_w, bandwidth)
}

/// Per-tier thresholds for an energy-efficiency target.
pub fn energy_efficiency_thresholds(scenario: &Scenario, eff: f64, bandwidth: f64) -> Result<Threshold> {
    scenario
        .tiers
        .iter()
        .map(|t| energy_efficiency_threshold(eff, t.power_w, bandwidth))
        .collect::<Result<Vec<_>>>()
        .map(Threshold::PerTier)
}

pub fn tagged_cdf(scenario: &Scenario, k: usize, class: LinkClass, r: f64, z_u: f64) -> Result<f64> {
    LocalModel::new(scenario, z_u, &AnalyticOptions::default())?.tagged_cdf(k, class, r)
}

pub fn tagged_pdf(scenario: &Scenario, k: usize, class: LinkClass, r: f64, z_u: f64) -> Result<f64> {
    LocalModel::new(scenario, z_u, &AnalyticOptions::default())?.tagged_pdf(k, class, r)
}

pub fn association_probability(scenario: &Scenario, j: usize, class: LinkClass, r: f64, z_u: f64) -> Result<f64> {
    LocalModel::new(scenario, z_u, &AnalyticOptions::default())?.association_probability(j, class, r)
}

pub fn interference_laplace(scenario: &Scenario, j: usize, class: LinkClass, s: f64, r: f64, z_u: f64) -> Result<f64> {
    LocalModel::new(scenario, z_u, &AnalyticOptions::default())?.interference_laplace(j, class, s, r)
}

pub fn local_coverage(
    scenario: &Scenario,
    z_u: f64,
    threshold: impl Into<Threshold>,
    method: AnalyticMethod,
    opts: &AnalyticOptions,
) -> Result<f64> {
    LocalModel::new(scenario, z_u, opts)?.coverage(&threshold.into(), method)
}

pub fn local_coverage_exact(scenario: &Scenario, z_u: f64, threshold: impl Into<Threshold>) -> Result<f64> {
    local_coverage(
        scenario,
        z_u,
        threshold,
        AnalyticMethod::Exact,
        &AnalyticOptions::default(),
    )
}

pub fn local_coverage_approx(scenario: &Scenario, z_u: f64, threshold: impl Into<Threshold>) -> Result<f64> {
    local_coverage(
        scenario,
        z_u,
        threshold,
        AnalyticMethod::Approx,
        &AnalyticOptions::default(),
    )
}

/// Coverage averaged over the user distribution.
pub fn overall_coverage(
    scenario: &Scenario,
    threshold: impl Into<Threshold>,
    method: AnalyticMethod,
    opts: &AnalyticOptions,
) -> Result<f64> {
    scenario.validate()?;
    opts.validate()?;
    let threshold = threshold.into();
    threshold.check(scenario.tiers.len())?;
    overall_from_local(
        &scenario.users,
        scenario.region_radius(),
        |z| LocalModel::new(scenario, z, opts)?.coverage(&threshold, method),
        &opts.quad,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{db_to_linear, dbm_to_watts};

    #[test]
    fn mu_values() {
        let ch = ChannelParams {
            m_los: 1,
            alpha_los: 2.0,
            eta_los: 1.0,
            ..fixtures::three_tier_table2().channel
        };
        let tier = TierConfig {
            altitude_m: 1.0,
            lambda: 1.0,
            beta: 0.0,
            power_w: 1.0,
        };
        assert_eq!(mu_threshold(&ch, &tier, LinkClass::Los, 1.0, 1.0), 1.0);
        assert_eq!(
            mu_threshold(&ch, &tier, LinkClass::Los, 3.0, 2.0),
            2.0 * mu_threshold(&ch, &tier, LinkClass::Los, 3.0, 1.0)
        );
        let ch2 = fixtures::three_tier_table2().channel;
        let t2 = TierConfig {
            power_w: dbm_to_watts(2.0),
            ..tier
        };
        let mu = mu_threshold(&ch2, &t2, LinkClass::Los, 150.0, db_to_linear(-15.0));
        assert!((mu - 8.978e5).abs() / 8.978e5 < 1e-3, "{mu}");
    }

    #[test]
    fn rate_and_energy_thresholds() {
        assert_eq!(rate_threshold(1e6, 1e6).unwrap(), 1.0);
        assert_eq!(rate_threshold(0.0, 1e6).unwrap(), 0.0);
        assert_eq!(rate_threshold(3e6, 1e6).unwrap(), 7.0);
        assert!(rate_threshold(1.0, 0.0).is_err());
        assert_eq!(energy_efficiency_threshold(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(energy_efficiency_threshold(1e3, 1e-3, 1.0).unwrap(), 1.0);
        assert_eq!(energy_efficiency_threshold(2e3, 1e-3, 1.0).unwrap(), 3.0);
        let sc = fixtures::three_tier_table2();
        let th = energy_efficiency_thresholds(&sc, 1e5, 1e3).unwrap();
        assert!(th.for_tier(0) < th.for_tier(2));
    }

    #[test]
    fn threshold_checks() {
        assert!(Threshold::Common(0.0).check(1).is_err());
        assert!(Threshold::PerTier(vec![0.1]).check(2).is_err());
        assert!(Threshold::PerTier(vec![0.1, 0.2]).check(2).is_ok());
    }
}
