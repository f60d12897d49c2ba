//! Distance distributions, association and interference seen from one user.
//!
//! Everything is expressed in the user's own frame. A UAV of tier `k` at
//! horizontal distance `t` from the user and angle `ψ` sits at distance
//! `sqrt(z² + t² + 2zt cos ψ)` from the town centre, so integrating the tier
//! intensity over `ψ` gives the ring density `A_k(t)`. The class mass density
//! `g_k^Q(t) = t P_k^Q(t) A_k(t)` then turns every disc or annulus integral
//! of the origin-frame formulation into a one-dimensional integral in `t`.

use std::f64::consts::PI;

use crate::chebyshev::PiecewiseChebyshev;
use crate::error::{invalid, Error, Result};
use crate::model::{
    exclusion_distance_unchecked, horizontal_from_slant, link_probability, LinkClass, Scenario, TierConfig,
};
use crate::quadrature::{integrate_1d, QuadResult, QuadSpec};

use super::AnalyticOptions;

/// Relative plane mass beyond the ring-profile horizon.
const HORIZON_TAIL: f64 = 1e-12;

/// Intensity of `tier` integrated over the circle of radius `t` around a
/// user at offset `z`, restricted to the deployment disc of radius `region`.
pub fn ring_density(tier: &TierConfig, region: f64, z: f64, t: f64) -> f64 {
    if tier.lambda == 0.0 {
        return 0.0;
    }
    if z == 0.0 || t == 0.0 {
        let d = z + t;
        return if d > region {
            0.0
        } else {
            2.0 * PI * tier.lambda * (-tier.beta * d).exp()
        };
    }
    let psi_lo = if region.is_finite() {
        let c = (region * region - z * z - t * t) / (2.0 * z * t);
        if c <= -1.0 {
            return 0.0;
        }
        c.min(1.0).acos()
    } else {
        0.0
    };
    if tier.beta == 0.0 {
        return 2.0 * tier.lambda * (PI - psi_lo);
    }
    let spec = QuadSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-15 * tier.lambda,
        ..QuadSpec::default()
    };
    let dz = z - t;
    let four_zt = 4.0 * z * t;
    let r = integrate_1d(
        |psi| {
            let c = (0.5 * psi).cos();
            let d = (dz * dz + four_zt * c * c).sqrt();
            (-tier.beta * d).exp()
        },
        psi_lo,
        PI,
        &spec,
    );
    2.0 * tier.lambda * r.value
}

/// Horizontal distance beyond which a tier holds a negligible share of its
/// mass as seen from a user at offset `z`.
fn horizon(tier: &TierConfig, region: f64, z: f64) -> f64 {
    let reach = if tier.beta > 0.0 {
        // the tail of t e^{-beta (t - z)} beyond z + x/beta is
        // e^{-x} (x + beta z + 1) / beta^2
        let bz = tier.beta * z;
        let mut x = 30.0;
        for _ in 0..100 {
            if (-x as f64).exp() * (x + bz + 1.0) <= HORIZON_TAIL {
                break;
            }
            x += 1.0;
        }
        z + x / tier.beta
    } else {
        f64::INFINITY
    };
    reach.min(z + region)
}

/// `q^{-α/2}`, with the common exponents spelled out.
fn path_gain(q: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        1.0 / q
    } else if alpha == 3.0 {
        1.0 / (q * q.sqrt())
    } else if alpha == 4.0 {
        1.0 / (q * q)
    } else {
        q.powf(-0.5 * alpha)
    }
}

/// `1 - (1 + x)^{-m}`.
fn interference_weight(x: f64, m: u32) -> f64 {
    match m {
        1 => x / (1.0 + x),
        2 => x * (2.0 + x) / ((1.0 + x) * (1.0 + x)),
        _ => -(-f64::from(m) * x.ln_1p()).exp_m1(),
    }
}

#[derive(Debug, Clone)]
struct TierRing {
    profile: Option<PiecewiseChebyshev<2>>,
    horizon: f64,
    breaks: Vec<f64>,
}

impl TierRing {
    fn build(scenario: &Scenario, k: usize, z: f64, opts: &AnalyticOptions) -> Result<Self> {
        let tier = scenario.tiers[k];
        let region = scenario.region_radius();
        let horizon = horizon(&tier, region, z);
        if !horizon.is_finite() {
            return Err(Error::DivergentCount);
        }
        let mut breaks = vec![z];
        if region.is_finite() {
            breaks.push((region - z).abs());
            breaks.push(region + z);
        }
        breaks.retain(|&b| b > 0.0 && b < horizon);
        breaks.sort_by(f64::total_cmp);
        if tier.lambda == 0.0 {
            return Ok(TierRing {
                profile: None,
                horizon,
                breaks,
            });
        }
        let scale = scenario.expected_tier_count(k)?;
        let channel = scenario.channel;
        let profile = PiecewiseChebyshev::fit(
            |t| {
                let a = ring_density(&tier, region, z, t);
                let p = link_probability(&channel, LinkClass::Los, tier.altitude_m, t);
                [t * p * a, t * (1.0 - p) * a]
            },
            0.0,
            horizon,
            &breaks,
            (opts.profile_rel_tol * scale).max(f64::MIN_POSITIVE),
        );
        Ok(TierRing {
            profile: Some(profile),
            horizon,
            breaks,
        })
    }

    fn mass(&self, class: LinkClass, rho: f64) -> f64 {
        self.profile.as_ref().map_or(0.0, |p| p.integral(rho, class.index()))
    }

    fn density(&self, class: LinkClass, rho: f64) -> f64 {
        self.profile.as_ref().map_or(0.0, |p| p.value(rho, class.index()))
    }
}

/// The analytic model of one user at offset `z_u` from the town centre.
///
/// Construction fits the class mass densities of every tier once; every
/// query afterwards is cheap. The model is immutable and `Sync`.
#[derive(Debug, Clone)]
pub struct LocalModel<'a> {
    scenario: &'a Scenario,
    z_u: f64,
    rings: Vec<TierRing>,
    opts: AnalyticOptions,
}

impl<'a> LocalModel<'a> {
    pub fn new(scenario: &'a Scenario, z_u: f64, opts: &AnalyticOptions) -> Result<Self> {
        if z_u < 0.0 || z_u.is_nan() {
            return Err(Error::NegativeDistance(z_u));
        }
        scenario.validate()?;
        let rings = (0..scenario.tiers.len())
            .map(|k| TierRing::build(scenario, k, z_u, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalModel {
            scenario,
            z_u,
            rings,
            opts: *opts,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn z_u(&self) -> f64 {
        self.z_u
    }

    pub fn options(&self) -> &AnalyticOptions {
        &self.opts
    }

    #[cfg(test)]
    pub(crate) fn horizon(&self, k: usize) -> f64 {
        self.rings[k].horizon
    }

    pub(crate) fn breaks(&self, k: usize) -> &[f64] {
        &self.rings[k].breaks
    }

    fn check_tier(&self, k: usize) -> Result<()> {
        if k >= self.rings.len() {
            Err(invalid("k", format!("tier index {k} out of range")))
        } else {
            Ok(())
        }
    }

    /// Expected number of class-`class` UAVs of tier `k` within horizontal
    /// distance `rho` of the user.
    pub fn class_mass(&self, k: usize, class: LinkClass, rho: f64) -> f64 {
        self.rings[k].mass(class, rho)
    }

    /// Same count over the whole plane.
    pub fn total_mass(&self, k: usize, class: LinkClass) -> f64 {
        self.rings[k].mass(class, f64::INFINITY)
    }

    /// Derivative of [`LocalModel::class_mass`] in `rho`.
    pub fn class_density(&self, k: usize, class: LinkClass, rho: f64) -> f64 {
        self.rings[k].density(class, rho)
    }

    /// CDF of the slant distance to the nearest class-`class` UAV of tier
    /// `k`. It saturates at `1 - exp(-total_mass)`.
    pub fn tagged_cdf(&self, k: usize, class: LinkClass, r: f64) -> Result<f64> {
        self.check_tier(k)?;
        let h = self.scenario.tiers[k].altitude_m;
        if r <= h {
            return Ok(0.0);
        }
        let rho = horizontal_from_slant(r, h);
        Ok(-(-self.class_mass(k, class, rho)).exp_m1())
    }

    /// Density of the same distance in `r`.
    pub fn tagged_pdf(&self, k: usize, class: LinkClass, r: f64) -> Result<f64> {
        self.check_tier(k)?;
        let tier = &self.scenario.tiers[k];
        if r <= tier.altitude_m {
            return Ok(0.0);
        }
        let rho = horizontal_from_slant(r, tier.altitude_m);
        // g(rho) / rho evaluated directly so the r -> h limit stays finite
        let per_length = link_probability(&self.scenario.channel, class, tier.altitude_m, rho)
            * ring_density(tier, self.scenario.region_radius(), self.z_u, rho);
        Ok((-self.class_mass(k, class, rho)).exp() * per_length * r)
    }

    /// Horizontal radius around the user that must be free of class-`interf`
    /// UAVs of tier `k` when the user is served by a class-`assoc` UAV of
    /// tier `j` at slant distance `r`.
    pub fn exclusion_radius(&self, j: usize, assoc: LinkClass, k: usize, interf: LinkClass, r: f64) -> f64 {
        let tiers = &self.scenario.tiers;
        let d = exclusion_distance_unchecked(&self.scenario.channel, assoc, interf, tiers[j].power_w, &tiers[k], r);
        horizontal_from_slant(d, tiers[k].altitude_m)
    }

    /// Probability that the tagged class-`assoc` UAV of tier `j` at slant
    /// distance `r` offers the strongest average received power.
    pub fn association_probability(&self, j: usize, assoc: LinkClass, r: f64) -> Result<f64> {
        self.check_tier(j)?;
        let h = self.scenario.tiers[j].altitude_m;
        if r < h {
            return Err(Error::BelowAltitude { r, altitude: h });
        }
        Ok(self.log_association(j, assoc, r).exp())
    }

    pub(crate) fn log_association(&self, j: usize, assoc: LinkClass, r: f64) -> f64 {
        let mut log_p = 0.0;
        for k in 0..self.rings.len() {
            for interf in LinkClass::ALL {
                if k == j && interf == assoc {
                    continue;
                }
                let z = self.exclusion_radius(j, assoc, k, interf, r);
                log_p -= self.class_mass(k, interf, z);
            }
        }
        log_p
    }

    /// `-ln E[exp(-s I)]` for the interference seen when served by a
    /// class-`assoc` UAV of tier `j` at slant distance `r`, with the inner
    /// integrals at relative tolerance `rel_tol`.
    pub(crate) fn neg_log_laplace(&self, j: usize, assoc: LinkClass, s: f64, r: f64, rel_tol: f64) -> QuadResult {
        let mut acc = QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
        if s == 0.0 {
            return acc;
        }
        let channel = &self.scenario.channel;
        let spec = QuadSpec {
            rel_tol,
            abs_tol: 1e-15,
            max_subdivisions: 4000,
            ..QuadSpec::default()
        };
        for (k, ring) in self.rings.iter().enumerate() {
            let Some(profile) = ring.profile.as_ref() else {
                continue;
            };
            let tier = &self.scenario.tiers[k];
            let h2 = tier.altitude_m * tier.altitude_m;
            for interf in LinkClass::ALL {
                let lo = self.exclusion_radius(j, assoc, k, interf, r);
                if lo >= ring.horizon {
                    continue;
                }
                let shape = channel.shape(interf);
                let m = f64::from(shape);
                let alpha = channel.alpha(interf);
                let gain = s * channel.eta(interf) * tier.power_w / m;
                let idx = interf.index();
                let integrand = |t: f64| {
                    let x = gain * path_gain(t * t + h2, alpha);
                    profile.value(t, idx) * interference_weight(x, shape)
                };
                let mut cuts = vec![lo];
                // where x crosses one the integrand changes character
                let knee2 = gain.powf(2.0 / alpha) - h2;
                if knee2 > 0.0 {
                    cuts.push(knee2.sqrt());
                }
                cuts.extend_from_slice(&ring.breaks);
                cuts.push(ring.horizon);
                cuts.retain(|&c| c >= lo && c <= ring.horizon);
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                for w in cuts.windows(2) {
                    let part = integrate_1d(integrand, w[0], w[1], &spec);
                    acc.value += part.value;
                    acc.error_estimate += part.error_estimate;
                    acc.evaluations += part.evaluations;
                    acc.converged &= part.converged || part.error_estimate <= 1e-9 * part.value.abs().max(1e-6);
                }
            }
        }
        acc
    }

    /// Laplace transform of the aggregate interference power at `s`.
    pub fn interference_laplace(&self, j: usize, assoc: LinkClass, s: f64, r: f64) -> Result<f64> {
        self.check_tier(j)?;
        if s < 0.0 || s.is_nan() {
            return Err(invalid("s", format!("must be non-negative, got {s}")));
        }
        let h = self.scenario.tiers[j].altitude_m;
        if r < h {
            return Err(Error::BelowAltitude { r, altitude: h });
        }
        let res = self.neg_log_laplace(j, assoc, s, r, self.opts.laplace_rel_tol);
        Ok((-res.into_value()?).exp())
    }

    /// Horizontal distance beyond which the tagged class-`class` UAV of tier
    /// `k` carries less than `residual` probability.
    pub(crate) fn tagged_reach(&self, k: usize, class: LinkClass, residual: f64) -> f64 {
        let ring = &self.rings[k];
        let total = ring.mass(class, f64::INFINITY);
        let tail = |rho: f64| (-ring.mass(class, rho)).exp() - (-total).exp();
        if tail(0.0) <= residual {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, ring.horizon);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if tail(mid) > residual {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}
