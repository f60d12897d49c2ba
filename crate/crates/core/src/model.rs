//! System model: densities, line-of-sight probability, link geometry,
//! exclusion distances and the Nakagami gain transform.
//!
//! Every quantity here is in linear units (watts, plain ratios, metres).
//! Decibel values only appear in [`crate::config`] and the helpers at the
//! bottom of this module.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Line-of-sight state of a single air-to-ground link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkClass {
    Los,
    Nlos,
}

impl LinkClass {
    pub const ALL: [LinkClass; 2] = [LinkClass::Los, LinkClass::Nlos];

    pub fn index(self) -> usize {
        match self {
            LinkClass::Los => 0,
            LinkClass::Nlos => 1,
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkClass::Los => f.write_str("LoS"),
            LinkClass::Nlos => f.write_str("NLoS"),
        }
    }
}

/// One tier of UAVs: common altitude, density law and transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierConfig {
    pub altitude_m: f64,
    /// Intensity at the town centre, per square metre.
    pub lambda: f64,
    /// Exponential decay rate of the intensity, per metre. Zero is homogeneous.
    pub beta: f64,
    pub power_w: f64,
}

impl TierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m > 0.0 && self.altitude_m.is_finite()) {
            return Err(invalid(
                "altitude_m",
                format!("must be positive, got {}", self.altitude_m),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", format!("must be non-negative, got {}", self.beta)));
        }
        if !(self.power_w > 0.0 && self.power_w.is_finite()) {
            return Err(invalid("power_w", format!("must be positive, got {}", self.power_w)));
        }
        Ok(())
    }
}

/// Ground-user intensity law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserDensity {
    pub lambda_u: f64,
    pub beta_u: f64,
}

impl UserDensity {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_u > 0.0 && self.lambda_u.is_finite()) {
            return Err(invalid("lambda_u", format!("must be positive, got {}", self.lambda_u)));
        }
        if !(self.beta_u >= 0.0 && self.beta_u.is_finite()) {
            return Err(invalid("beta_u", format!("must be non-negative, got {}", self.beta_u)));
        }
        Ok(())
    }
}

/// Propagation and fading parameters shared by all tiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Mean additional gain of LoS links (linear).
    pub eta_los: f64,
    /// Mean additional gain of NLoS links (linear).
    pub eta_nlos: f64,
    /// Nakagami shape of LoS links.
    pub m_los: u32,
    /// Nakagami shape of NLoS links.
    pub m_nlos: u32,
    pub noise_w: f64,
    /// Environment constant `a` of the elevation-angle LoS model.
    pub env_a: f64,
    /// Environment constant `b` of the elevation-angle LoS model.
    pub env_b: f64,
    /// Replaces the elevation-angle model by a constant LoS probability.
    /// Only meant for closed-form checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los_override: Option<f64>,
}

impl ChannelParams {
    pub fn alpha(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::Los => self.alpha_los,
            LinkClass::Nlos => self.alpha_nlos,
        }
    }

    pub fn eta(&self, class: LinkClass) -> f64 {
        match class {
            LinkClass::Los => self.eta_los,
            LinkClass::Nlos => self.eta_nlos,
        }
    }

    pub fn shape(&self, class: LinkClass) -> u32 {
        match class {
            LinkClass::Los => self.m_los,
            LinkClass::Nlos => self.m_nlos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        positive("alpha_los", self.alpha_los)?;
        positive("alpha_nlos", self.alpha_nlos)?;
        positive("eta_los", self.eta_los)?;
        positive("eta_nlos", self.eta_nlos)?;
        positive("noise_w", self.noise_w)?;
        positive("env_a", self.env_a)?;
        positive("env_b", self.env_b)?;
        if self.alpha_los >= self.alpha_nlos {
            return Err(invalid("alpha_los", "must be smaller than alpha_nlos"));
        }
        if self.eta_los <= self.eta_nlos {
            return Err(invalid("eta_los", "must be larger than eta_nlos"));
        }
        if self.m_los == 0 || self.m_nlos == 0 {
            return Err(invalid("m_los", "Nakagami shapes must be integers >= 1"));
        }
        if let Some(p) = self.los_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("los_override", format!("must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Something worth telling the user about a scenario that is still valid.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    DuplicateTier { first: usize, second: usize },
}

impl fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioWarning::DuplicateTier { first, second } => {
                write!(f, "tiers {} and {} have identical parameters", first + 1, second + 1)
            }
        }
    }
}

/// A fully evaluable deployment: users, ordered UAV tiers and the channel.
///
/// `region_radius_m` bounds the deployment region of every tier to a disc
/// around the town centre. `None` is the unbounded plane, which requires
/// `beta > 0` on every tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub users: UserDensity,
    pub tiers: Vec<TierConfig>,
    pub channel: ChannelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_radius_m: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<Vec<ScenarioWarning>> {
        self.users.validate()?;
        self.channel.validate()?;
        if self.tiers.is_empty() {
            return Err(invalid("tiers", "at least one tier is required"));
        }
        for tier in &self.tiers {
            tier.validate()?;
        }
        match self.region_radius_m {
            Some(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(invalid("region_radius_m", format!("must be positive, got {r}")));
            }
            None if self.tiers.iter().any(|t| t.beta == 0.0 && t.lambda > 0.0) => {
                return Err(Error::DivergentCount);
            }
            _ => {}
        }
        let mut warnings = Vec::new();
        for (i, a) in self.tiers.iter().enumerate() {
            for (j, b) in self.tiers.iter().enumerate().skip(i + 1) {
                if a == b {
                    warnings.push(ScenarioWarning::DuplicateTier { first: i, second: j });
                }
            }
        }
        Ok(warnings)
    }

    pub fn region_radius(&self) -> f64 {
        self.region_radius_m.unwrap_or(f64::INFINITY)
    }

    /// Expected number of UAVs of tier `k` inside the deployment region.
    pub fn expected_tier_count(&self, k: usize) -> Result<f64> {
        expected_uav_count(&self.tiers[k], self.region_radius())
    }

    /// Intensity of tier `k` at horizontal distance `z` from the centre,
    /// zero outside the deployment region.
    pub(crate) fn tier_intensity(&self, k: usize, z: f64) -> f64 {
        if z > self.region_radius() {
            0.0
        } else {
            let t = &self.tiers[k];
            t.lambda * (-t.beta * z).exp()
        }
    }
}

fn check_offset(z: f64) -> Result<()> {
    if z < 0.0 || z.is_nan() {
        Err(Error::NegativeDistance(z))
    } else {
        Ok(())
    }
}

/// User intensity at distance `z` from the town centre.
pub fn user_density(users: &UserDensity, z: f64) -> Result<f64> {
    check_offset(z)?;
    Ok(users.lambda_u * (-users.beta_u * z).exp())
}

/// UAV intensity of a tier at horizontal distance `z` from the town centre.
pub fn uav_density(tier: &TierConfig, z: f64) -> Result<f64> {
    check_offset(z)?;
    Ok(tier.lambda * (-tier.beta * z).exp())
}

/// `1 - e^{-x}(1 + x)`, accurate for small `x`.
pub(crate) fn gamma2_cdf(x: f64) -> f64 {
    if x < 0.1 {
        // alternating series sum_{n>=2} (-1)^n (n-1) x^n / n!
        let mut term = x * x / 2.0;
        let mut sum = 0.0f64;
        let mut n = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += (n - 1.0) * term;
            n += 1.0;
            term *= -x / n;
        }
        sum
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

/// Expected number of UAVs of a tier inside a disc of the given radius
/// centred on the town centre. Pass `f64::INFINITY` for the whole plane.
pub fn expected_uav_count(tier: &TierConfig, radius: f64) -> Result<f64> {
    if radius.is_nan() || radius < 0.0 {
        return Err(invalid("radius", format!("must be non-negative, got {radius}")));
    }
    if tier.lambda == 0.0 || radius == 0.0 {
        return Ok(0.0);
    }
    if tier.beta == 0.0 {
        if radius.is_infinite() {
            return Err(Error::DivergentCount);
        }
        return Ok(PI * radius * radius * tier.lambda);
    }
    let plane = 2.0 * PI * tier.lambda / (tier.beta * tier.beta);
    if radius.is_infinite() {
        Ok(plane)
    } else {
        Ok(plane * gamma2_cdf(tier.beta * radius))
    }
}

/// Probability that a UAV at `altitude` and horizontal distance
/// `horiz_dist` from the user has a line-of-sight link.
pub fn los_probability(channel: &ChannelParams, altitude: f64, horiz_dist: f64) -> f64 {
    if let Some(p) = channel.los_override {
        return p;
    }
    let elevation_deg = if horiz_dist <= 0.0 {
        90.0
    } else {
        altitude.atan2(horiz_dist).to_degrees()
    };
    let a = channel.env_a;
    1.0 / (1.0 + a * (-channel.env_b * (elevation_deg - a)).exp())
}

/// Probability that the link falls in `class`.
pub fn link_probability(channel: &ChannelParams, class: LinkClass, altitude: f64, horiz_dist: f64) -> f64 {
    let p = los_probability(channel, altitude, horiz_dist);
    match class {
        LinkClass::Los => p,
        LinkClass::Nlos => 1.0 - p,
    }
}

/// Horizontal distance between a user at `(z_u, 0)` and the ground
/// projection of a UAV at polar position `(l, theta)`.
pub fn horizontal_user_to_uav_distance(z_u: f64, l: f64, theta: f64) -> f64 {
    let dx = l * theta.cos() - z_u;
    let dy = l * theta.sin();
    dx.hypot(dy)
}

/// Euclidean distance between a user at `(z_u, 0)` and a UAV at polar
/// position `(l, theta)` and altitude `h`.
pub fn user_to_uav_distance(z_u: f64, l: f64, theta: f64, h: f64) -> f64 {
    horizontal_user_to_uav_distance(z_u, l, theta).hypot(h)
}

/// Minimum distance of a class-`interf` UAV of `tier_k` given that the user
/// is served by a class-`assoc` UAV of `tier_j` at distance `r`.
///
/// The mean fading gain is one, so only the `eta` and power ratios enter.
pub fn exclusion_distance(
    channel: &ChannelParams,
    assoc: LinkClass,
    interf: LinkClass,
    tier_j: &TierConfig,
    tier_k: &TierConfig,
    r: f64,
) -> Result<f64> {
    if r < tier_j.altitude_m {
        return Err(Error::BelowAltitude {
            r,
            altitude: tier_j.altitude_m,
        });
    }
    Ok(exclusion_distance_unchecked(
        channel,
        assoc,
        interf,
        tier_j.power_w,
        tier_k,
        r,
    ))
}

pub(crate) fn exclusion_distance_unchecked(
    channel: &ChannelParams,
    assoc: LinkClass,
    interf: LinkClass,
    power_j: f64,
    tier_k: &TierConfig,
    r: f64,
) -> f64 {
    // eta_i rho_k d^{-alpha_i} = eta_a rho_j r^{-alpha_a}
    let alpha_a = channel.alpha(assoc);
    let alpha_i = channel.alpha(interf);
    let ratio = channel.eta(interf) * tier_k.power_w / (channel.eta(assoc) * power_j);
    let balance = if assoc == interf {
        ratio.powf(1.0 / alpha_i) * r
    } else {
        ratio.powf(1.0 / alpha_i) * r.powf(alpha_a / alpha_i)
    };
    balance.max(tier_k.altitude_m)
}

/// Horizontal radius of the exclusion disc around the user.
pub fn horizontal_exclusion(
    channel: &ChannelParams,
    assoc: LinkClass,
    interf: LinkClass,
    tier_j: &TierConfig,
    tier_k: &TierConfig,
    r: f64,
) -> Result<f64> {
    let d = exclusion_distance(channel, assoc, interf, tier_j, tier_k, r)?;
    Ok(horizontal_from_slant(d, tier_k.altitude_m))
}

pub(crate) fn horizontal_from_slant(d: f64, h: f64) -> f64 {
    ((d - h) * (d + h)).max(0.0).sqrt()
}

/// `E[exp(-t G)]` for a unit-mean Gamma gain of integer shape `m`.
pub fn gamma_gain_laplace(m: u32, t: f64) -> f64 {
    let m = f64::from(m);
    (m / (m + t)).powf(m)
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn reference_channel() -> ChannelParams {
        ChannelParams {
            alpha_los: 2.0,
            alpha_nlos: 3.0,
            eta_los: 1.0,
            eta_nlos: 0.01,
            m_los: 2,
            m_nlos: 1,
            noise_w: 1e-7,
            env_a: 4.88,
            env_b: 0.429,
            los_override: None,
        }
    }

    fn tier(h: f64, lambda: f64, beta: f64, power_w: f64) -> TierConfig {
        TierConfig {
            altitude_m: h,
            lambda,
            beta,
            power_w,
        }
    }

    #[test]
    fn densities() {
        let users = UserDensity {
            lambda_u: 1e-3,
            beta_u: 5e-3,
        };
        assert_eq!(user_density(&users, 0.0).unwrap(), 1e-3);
        assert_relative_eq!(
            user_density(&users, 1000.0).unwrap(),
            6.737_946_999e-6,
            max_relative = 1e-9
        );
        let flat = UserDensity { beta_u: 0.0, ..users };
        assert_eq!(user_density(&flat, 1e4).unwrap(), 1e-3);
        assert!(user_density(&users, -1.0).is_err());

        let t = tier(100.0, 4e-5, 3.2e-3, 1.0);
        assert_eq!(uav_density(&t, 0.0).unwrap(), 4e-5);
        assert_relative_eq!(
            uav_density(&t, 1000.0).unwrap(),
            4e-5 * (-3.2f64).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(uav_density(&t, 1000.0).unwrap(), 1.6304e-6, max_relative = 1e-4);
        assert_eq!(uav_density(&tier(1.0, 4e-5, 0.0, 1.0), 999.0).unwrap(), 4e-5);
        assert!(uav_density(&t, -0.5).is_err());
    }

    #[test]
    fn counts() {
        let t = tier(100.0, 4e-5, 3.2e-3, 1.0);
        let plane = expected_uav_count(&t, f64::INFINITY).unwrap();
        assert_relative_eq!(plane, 2.0 * PI * 4e-5 / (3.2e-3f64).powi(2), max_relative = 1e-12);
        assert!((plane - 24.54).abs() < 0.01);
        assert_eq!(expected_uav_count(&t, 0.0).unwrap(), 0.0);
        assert!(expected_uav_count(&t, 1e-9).unwrap() < 1e-15);
        let flat = tier(100.0, 1e-6, 0.0, 1.0);
        assert!((expected_uav_count(&flat, 2820.9).unwrap() - 25.0).abs() < 1e-3);
        assert_eq!(expected_uav_count(&flat, f64::INFINITY), Err(Error::DivergentCount));
        // truncated disc, R = 5 km
        let r5 = expected_uav_count(&t, 5000.0).unwrap();
        let x: f64 = 3.2e-3 * 5000.0;
        assert_relative_eq!(r5, plane * (1.0 - (-x).exp() * (1.0 + x)), max_relative = 1e-12);
    }

    #[test]
    fn small_argument_series_matches_direct_form() {
        for &x in &[1e-8f64, 1e-4, 0.01, 0.05, 0.0999] {
            let direct = 1.0 - (-x).exp() * (1.0 + x);
            let series = gamma2_cdf(x);
            assert_relative_eq!(series, direct, max_relative = 1e-6);
        }
        assert_relative_eq!(gamma2_cdf(1e-8), 0.5e-16, max_relative = 1e-6);
    }

    #[test]
    fn los_probability_values() {
        let ch = reference_channel();
        let overhead = los_probability(&ch, 100.0, 0.0);
        let expected = 1.0 / (1.0 + 4.88 * (-0.429f64 * (90.0 - 4.88)).exp());
        assert!((overhead - expected).abs() < 1e-15);
        assert!((overhead - 1.0).abs() < 1e-15);
        let far = los_probability(&ch, 100.0, 1000.0);
        assert!((far - 0.2264).abs() < 1e-4, "{far}");
    }

    #[test]
    fn distances() {
        assert_eq!(user_to_uav_distance(0.0, 0.0, 1.3, 100.0), 100.0);
        assert_relative_eq!(
            user_to_uav_distance(300.0, 300.0, 0.0, 50.0),
            50.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            user_to_uav_distance(100.0, 200.0, PI / 2.0, 100.0),
            244.948_974_278,
            max_relative = 1e-9
        );
    }

    #[test]
    fn exclusion_cases() {
        let ch = reference_channel();
        let t = tier(100.0, 1e-5, 1e-3, 1e-3);
        let d = exclusion_distance(&ch, LinkClass::Los, LinkClass::Los, &t, &t, 500.0).unwrap();
        assert_eq!(d, 500.0);
        let d = exclusion_distance(&ch, LinkClass::Los, LinkClass::Nlos, &t, &t, 1000.0).unwrap();
        assert_eq!(d, 100.0);
        let balance = 0.01f64.powf(1.0 / 3.0) * 1000f64.powf(2.0 / 3.0);
        assert!((balance - 21.544).abs() < 1e-3);

        let j = tier(50.0, 1e-5, 1e-3, 1e-3);
        let k = tier(50.0, 1e-5, 1e-3, 8e-3);
        let d = exclusion_distance(&ch, LinkClass::Nlos, LinkClass::Nlos, &j, &k, 200.0).unwrap();
        assert_relative_eq!(d, 400.0, max_relative = 1e-12);

        assert!(exclusion_distance(&ch, LinkClass::Los, LinkClass::Los, &t, &t, 99.0).is_err());

        let z = horizontal_exclusion(&ch, LinkClass::Los, LinkClass::Los, &t, &t, 500.0).unwrap();
        assert_relative_eq!(z, 489.897_948_557, max_relative = 1e-9);
        let z = horizontal_exclusion(&ch, LinkClass::Los, LinkClass::Nlos, &t, &t, 1000.0).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn gamma_laplace_values() {
        assert_eq!(gamma_gain_laplace(1, 1.0), 0.5);
        assert_eq!(gamma_gain_laplace(3, 0.0), 1.0);
        assert_eq!(gamma_gain_laplace(2, 2.0), 0.25);
    }

    #[test]
    fn gamma_laplace_matches_density_integral() {
        // E[e^{-tG}] = int_0^inf e^{-tg} m^m g^{m-1} e^{-mg} / (m-1)! dg, midpoint rule.
        let m = 2u32;
        let t = 2.0;
        let n = 400_000;
        let upper = 40.0;
        let dg = upper / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let g = (i as f64 + 0.5) * dg;
            sum += (-t * g).exp() * 4.0 * g * (-2.0 * g).exp() * dg;
        }
        assert!((sum - gamma_gain_laplace(m, t)).abs() < 1e-8);
    }

    #[test]
    fn unit_conversions() {
        assert_relative_eq!(dbm_to_watts(0.0), 1e-3, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(12.0), 0.015_848_931_924_611, max_relative = 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert_relative_eq!(linear_to_db(db_to_linear(-15.0)), -15.0, max_relative = 1e-12);
    }

    #[test]
    fn scenario_validation() {
        let mut sc = Scenario {
            users: UserDensity {
                lambda_u: 1e-3,
                beta_u: 5e-3,
            },
            tiers: vec![tier(100.0, 1e-6, 0.0, 5e-3)],
            channel: reference_channel(),
            region_radius_m: None,
        };
        assert_eq!(sc.validate(), Err(Error::DivergentCount));
        sc.region_radius_m = Some(2820.9);
        assert!(sc.validate().unwrap().is_empty());
        sc.tiers.push(sc.tiers[0]);
        assert_eq!(sc.validate().unwrap().len(), 1);
        sc.tiers.clear();
        assert!(sc.validate().is_err());

        let mut ch = reference_channel();
        ch.alpha_los = 3.5;
        assert!(ch.validate().is_err());
        let mut ch = reference_channel();
        ch.m_nlos = 0;
        assert!(ch.validate().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn densities_nonincreasing(lambda in 1e-7..1e-3f64, beta in 0.0..0.05f64, z in 0.0..5e3f64, dz in 0.0..1e3f64) {
                let t = tier(100.0, lambda, beta, 1.0);
                let a = uav_density(&t, z).unwrap();
                let b = uav_density(&t, z + dz).unwrap();
                prop_assert!(b <= a);
                prop_assert!(b > 0.0);
            }

            #[test]
            fn los_monotone(h in 10.0..500.0f64, dh in 1.0..100.0f64, z in 1.0..5e3f64, dz in 1.0..1e3f64) {
                let ch = reference_channel();
                let p = los_probability(&ch, h, z);
                prop_assert!(p > 0.0 && p < 1.0);
                prop_assert!(los_probability(&ch, h + dh, z) >= p);
                prop_assert!(los_probability(&ch, h, z + dz) <= p);
            }

            #[test]
            fn exclusion_never_below_altitude(
                r_over in 0.0..3e3f64, hj in 20.0..200.0f64, hk in 20.0..200.0f64,
                pj in 1e-4..1e-1f64, pk in 1e-4..1e-1f64, a in 0usize..2, i in 0usize..2,
            ) {
                let ch = reference_channel();
                let tj = tier(hj, 1e-5, 1e-3, pj);
                let tk = tier(hk, 1e-5, 1e-3, pk);
                let r = hj + r_over;
                let d = exclusion_distance(&ch, LinkClass::ALL[a], LinkClass::ALL[i], &tj, &tk, r).unwrap();
                prop_assert!(d >= hk);
                let z = horizontal_exclusion(&ch, LinkClass::ALL[a], LinkClass::ALL[i], &tj, &tk, r).unwrap();
                prop_assert!(z >= 0.0 && z.is_finite());
                let same = exclusion_distance(&ch, LinkClass::ALL[a], LinkClass::ALL[a], &tj, &tj, r).unwrap();
                prop_assert_eq!(same, r.max(hj));
            }

            #[test]
            fn count_converges_to_plane(lambda in 1e-6..1e-4f64, beta in 1e-4..1e-1f64) {
                let t = tier(100.0, lambda, beta, 1.0);
                let plane = expected_uav_count(&t, f64::INFINITY).unwrap();
                // e^{-x}(1+x) < 1e-7 once x >= 20
                let r = 20.0 / beta;
                let disc = expected_uav_count(&t, r).unwrap();
                prop_assert!((plane - disc) / plane < 1e-6);
                prop_assert!(disc <= plane);
            }
        }

        #[test]
        fn gamma_laplace_completely_monotone_on_grid() {
            for m in 1..=5u32 {
                let ts: Vec<f64> = (0..120).map(|i| i as f64 * 0.25).collect();
                let vals: Vec<f64> = ts.iter().map(|&t| gamma_gain_laplace(m, t)).collect();
                for w in vals.windows(3) {
                    assert!(w[0] > 0.0 && w[1] < w[0] && w[2] < w[1]);
                    assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-15, "convexity m={m}");
                }
            }
        }
    }
}
