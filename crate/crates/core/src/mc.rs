//! Seeded Monte-Carlo simulation of the network.
//!
//! Each trial draws a fresh deployment of every tier, a LoS/NLoS state for
//! every link and a fresh fading gain per UAV. Trial `i` owns the ChaCha8
//! stream `i` of the root seed, so results do not depend on how trials are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Threshold;
use crate::error::{invalid, Error, Result};
use crate::model::{
    exclusion_distance_unchecked, gamma2_cdf, horizontal_from_slant, los_probability, ChannelParams, LinkClass,
    Scenario, TierConfig, UserDensity,
};

/// Largest simulation disc radius, in metres.
pub const MAX_SIM_RADIUS: f64 = 50_000.0;

/// How tier positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingPath {
    /// Homogeneous points thinned with keep probability `e^{-βl}`.
    #[default]
    Thinning,
    /// Poisson count, radii by inverting the radial mass law.
    InverseCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    /// Deployment disc radius. `None` picks one per tier from
    /// `tail_mass_tol`.
    #[serde(default)]
    pub sim_radius_m: Option<f64>,
    #[serde(default = "default_tail_mass_tol")]
    pub tail_mass_tol: f64,
    #[serde(default)]
    pub sampling: SamplingPath,
}

fn default_tail_mass_tol() -> f64 {
    1e-4
}

impl SimConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        SimConfig {
            seed,
            trials,
            sim_radius_m: None,
            tail_mass_tol: default_tail_mass_tol(),
            sampling: SamplingPath::Thinning,
        }
    }

    pub fn with_sampling(self, sampling: SamplingPath) -> Self {
        SimConfig { sampling, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        if !(self.tail_mass_tol > 0.0 && self.tail_mass_tol < 1.0) {
            return Err(invalid(
                "tail_mass_tol",
                format!("must lie in (0, 1), got {}", self.tail_mass_tol),
            ));
        }
        if let Some(r) = self.sim_radius_m {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("sim_radius_m", format!("must be positive, got {r}")));
            }
        }
        Ok(())
    }

    /// Simulation disc radius of every tier, checked against the mass
    /// tolerance.
    pub fn radii(&self, scenario: &Scenario) -> Result<Vec<f64>> {
        self.validate()?;
        let region = scenario.region_radius();
        scenario
            .tiers
            .iter()
            .map(|tier| {
                let auto = mass_radius(tier, self.tail_mass_tol).min(region);
                let radius = match self.sim_radius_m {
                    Some(r) => r.min(region),
                    None => auto,
                };
                if !radius.is_finite() {
                    return Err(Error::DivergentCount);
                }
                if radius < auto && tier.lambda > 0.0 {
                    let kept = radial_mass(tier.beta, radius) / radial_mass(tier.beta, region);
                    if kept < 1.0 - self.tail_mass_tol {
                        return Err(invalid(
                            "sim_radius_m",
                            format!("keeps only {kept:.6} of the mass of a tier at {} m", tier.altitude_m),
                        ));
                    }
                }
                Ok(radius)
            })
            .collect()
    }
}

/// Radius beyond which a tier holds less than `tol` of its plane mass,
/// capped at [`MAX_SIM_RADIUS`]. Infinite for homogeneous tiers.
pub fn mass_radius(tier: &TierConfig, tol: f64) -> f64 {
    if tier.beta == 0.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while 1.0 - gamma2_cdf(hi) > tol {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - gamma2_cdf(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi / tier.beta).min(MAX_SIM_RADIUS)
}

/// `∫_0^R e^{-βl} l dl` up to the common `2πλ` factor.
fn radial_mass(beta: f64, radius: f64) -> f64 {
    if beta == 0.0 {
        0.5 * radius * radius
    } else if radius.is_infinite() {
        1.0 / (beta * beta)
    } else {
        gamma2_cdf(beta * radius) / (beta * beta)
    }
}

/// Monte-Carlo estimate with a 95% normal confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_bernoulli(successes: usize, trials: usize, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        McEstimate {
            mean: p,
            half_width_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            half_width_95: 1.96 * (var / n).sqrt(),
            trials: samples.len(),
            seed,
        }
    }
}

/// Ground projection of one UAV, in polar coordinates around the centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uav {
    pub l: f64,
    pub theta: f64,
}

impl Uav {
    /// Horizontal distance to a user at `(z_u, 0)`.
    pub fn horizontal_distance(&self, z_u: f64) -> f64 {
        let dx = self.l * self.theta.cos() - z_u;
        let dy = self.l * self.theta.sin();
        dx.hypot(dy)
    }
}

/// One realization of every tier, with link states relative to a user once
/// [`classify_links`] has run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Deployment {
    pub tiers: Vec<Vec<Uav>>,
    pub classes: Vec<Vec<LinkClass>>,
}

/// RNG of trial `index` under root seed `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

/// Draws one tier inside the disc of radius `radius` by thinning.
pub fn sample_tier<R: Rng + ?Sized>(tier: &TierConfig, radius: f64, rng: &mut R) -> Vec<Uav> {
    if tier.lambda == 0.0 {
        return Vec::new();
    }
    let n = poisson(tier.lambda * std::f64::consts::PI * radius * radius, rng);
    let mut out = Vec::new();
    for _ in 0..n {
        let l = radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        if tier.beta == 0.0 || rng.random::<f64>() < (-tier.beta * l).exp() {
            out.push(Uav { l, theta });
        }
    }
    out
}

/// Draws one tier by sampling the count and then each radius from its
/// conditional law.
pub fn sample_tier_inverse_cdf<R: Rng + ?Sized>(tier: &TierConfig, radius: f64, rng: &mut R) -> Vec<Uav> {
    if tier.lambda == 0.0 {
        return Vec::new();
    }
    let tau = std::f64::consts::TAU;
    let n = poisson(tau * tier.lambda * radial_mass(tier.beta, radius), rng);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let l = if tier.beta == 0.0 {
                radius * u.sqrt()
            } else {
                let target = u * gamma2_cdf(tier.beta * radius);
                let (mut lo, mut hi) = (0.0, tier.beta * radius);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if gamma2_cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi) / tier.beta
            };
            Uav {
                l,
                theta: tau * rng.random::<f64>(),
            }
        })
        .collect()
}

fn sample_deployment<R: Rng + ?Sized>(
    scenario: &Scenario,
    radii: &[f64],
    path: SamplingPath,
    rng: &mut R,
) -> Deployment {
    let tiers = scenario
        .tiers
        .iter()
        .zip(radii)
        .map(|(tier, &radius)| match path {
            SamplingPath::Thinning => sample_tier(tier, radius, rng),
            SamplingPath::InverseCdf => sample_tier_inverse_cdf(tier, radius, rng),
        })
        .collect();
    Deployment {
        tiers,
        classes: Vec::new(),
    }
}

/// Draws the LoS state of every link to a user at offset `z_u`.
pub fn classify_links<R: Rng + ?Sized>(deployment: &mut Deployment, scenario: &Scenario, z_u: f64, rng: &mut R) {
    deployment.classes = deployment
        .tiers
        .iter()
        .zip(&scenario.tiers)
        .map(|(uavs, tier)| {
            uavs.iter()
                .map(|u| {
                    let p = los_probability(&scenario.channel, tier.altitude_m, u.horizontal_distance(z_u));
                    if rng.random::<f64>() < p {
                        LinkClass::Los
                    } else {
                        LinkClass::Nlos
                    }
                })
                .collect()
        })
        .collect();
}

/// Unit-mean Gamma power gain of a class-`class` link.
pub fn sample_gain<R: Rng + ?Sized>(class: LinkClass, channel: &ChannelParams, rng: &mut R) -> f64 {
    let m = f64::from(channel.shape(class));
    Gamma::new(m, 1.0 / m).expect("positive shape").sample(rng)
}

/// The serving UAV of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub tier: usize,
    pub class: LinkClass,
    /// Index of the UAV within its tier.
    pub index: usize,
    /// Slant distance, metres.
    pub r: f64,
}

/// Strongest average received power among the nearest UAV of every
/// (tier, class). Ties go to LoS, then to the lower tier. `None` when no UAV
/// exists.
pub fn associate(deployment: &Deployment, scenario: &Scenario, z_u: f64) -> Option<Association> {
    let ch = &scenario.channel;
    let mut best: Option<(f64, Association)> = None;
    for class in LinkClass::ALL {
        for (k, tier) in scenario.tiers.iter().enumerate() {
            let nearest = deployment.tiers[k]
                .iter()
                .zip(&deployment.classes[k])
                .enumerate()
                .filter(|(_, (_, c))| **c == class)
                .map(|(i, (u, _))| (i, u.horizontal_distance(z_u)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((index, dh)) = nearest {
                let r = dh.hypot(tier.altitude_m);
                let power = ch.eta(class) * tier.power_w * r.powf(-ch.alpha(class));
                if best.as_ref().is_none_or(|(p, _)| power > *p) {
                    best = Some((
                        power,
                        Association {
                            tier: k,
                            class,
                            index,
                            r,
                        },
                    ));
                }
            }
        }
    }
    best.map(|(_, a)| a)
}

/// SINR of one trial with fresh fading on every link.
pub fn realize_sinr<R: Rng + ?Sized>(
    deployment: &Deployment,
    association: &Association,
    scenario: &Scenario,
    z_u: f64,
    rng: &mut R,
) -> f64 {
    let ch = &scenario.channel;
    let received = |k: usize, class: LinkClass, r: f64, g: f64| {
        ch.eta(class) * scenario.tiers[k].power_w * g * r.powf(-ch.alpha(class))
    };
    let g = sample_gain(association.class, ch, rng);
    let signal = received(association.tier, association.class, association.r, g);
    let mut interference = 0.0;
    for (k, uavs) in deployment.tiers.iter().enumerate() {
        let h = scenario.tiers[k].altitude_m;
        for (i, (u, &class)) in uavs.iter().zip(&deployment.classes[k]).enumerate() {
            if k == association.tier && i == association.index {
                continue;
            }
            let r = u.horizontal_distance(z_u).hypot(h);
            interference += received(k, class, r, sample_gain(class, ch, rng));
        }
    }
    signal / (interference + ch.noise_w)
}

/// Runs `trials` independent trials in parallel and returns their results
/// in trial order.
fn run_trials<T: Send, F>(sim: &SimConfig, f: F) -> Vec<T>
where
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..sim.trials as u64)
        .into_par_iter()
        .map(|i| f(&mut trial_rng(sim.seed, i)))
        .collect()
}

fn covered<R: Rng + ?Sized>(
    scenario: &Scenario,
    radii: &[f64],
    path: SamplingPath,
    z_u: f64,
    threshold: &Threshold,
    rng: &mut R,
) -> bool {
    let mut dep = sample_deployment(scenario, radii, path, rng);
    classify_links(&mut dep, scenario, z_u, rng);
    match associate(&dep, scenario, z_u) {
        Some(a) => realize_sinr(&dep, &a, scenario, z_u, rng) > threshold.for_tier(a.tier),
        None => false,
    }
}

fn prepare(scenario: &Scenario, sim: &SimConfig, threshold: &Threshold) -> Result<Vec<f64>> {
    scenario.validate()?;
    threshold.check(scenario.tiers.len())?;
    sim.radii(scenario)
}

/// Fraction of trials in which a user at `z_u` sees SINR above threshold.
pub fn estimate_local_coverage(
    scenario: &Scenario,
    sim: &SimConfig,
    z_u: f64,
    threshold: impl Into<Threshold>,
) -> Result<McEstimate> {
    if z_u < 0.0 || z_u.is_nan() {
        return Err(Error::NegativeDistance(z_u));
    }
    let threshold = threshold.into();
    let radii = prepare(scenario, sim, &threshold)?;
    let hits = run_trials(sim, |rng| covered(scenario, &radii, sim.sampling, z_u, &threshold, rng));
    Ok(McEstimate::from_bernoulli(
        hits.iter().filter(|&&h| h).count(),
        sim.trials,
        sim.seed,
    ))
}

/// Draws a user offset from the user density restricted to `region`.
pub fn sample_user_offset<R: Rng + ?Sized>(users: &UserDensity, region: f64, rng: &mut R) -> f64 {
    if users.beta_u == 0.0 {
        return region * rng.random::<f64>().sqrt();
    }
    let radial = Gamma::new(2.0, 1.0 / users.beta_u).expect("positive rate");
    loop {
        let z = radial.sample(rng);
        if z <= region {
            return z;
        }
    }
}

/// Coverage averaged over user offsets drawn from the user density.
pub fn estimate_overall_coverage(
    scenario: &Scenario,
    sim: &SimConfig,
    threshold: impl Into<Threshold>,
) -> Result<McEstimate> {
    let threshold = threshold.into();
    let radii = prepare(scenario, sim, &threshold)?;
    let region = scenario.region_radius();
    if scenario.users.beta_u == 0.0 && !region.is_finite() {
        return Err(Error::DivergentCount);
    }
    let hits = run_trials(sim, |rng| {
        let z = sample_user_offset(&scenario.users, region, rng);
        covered(scenario, &radii, sim.sampling, z, &threshold, rng)
    });
    Ok(McEstimate::from_bernoulli(
        hits.iter().filter(|&&h| h).count(),
        sim.trials,
        sim.seed,
    ))
}

/// Slant distance to the nearest class-`class` UAV of tier `k` in every
/// trial, `+∞` when there is none.
pub fn empirical_tagged_distance(
    scenario: &Scenario,
    sim: &SimConfig,
    k: usize,
    class: LinkClass,
    z_u: f64,
) -> Result<Vec<f64>> {
    scenario.validate()?;
    if k >= scenario.tiers.len() {
        return Err(invalid("k", format!("tier index {k} out of range")));
    }
    let radii = sim.radii(scenario)?;
    let h = scenario.tiers[k].altitude_m;
    Ok(run_trials(sim, |rng| {
        let mut dep = sample_deployment(scenario, &radii, sim.sampling, rng);
        classify_links(&mut dep, scenario, z_u, rng);
        dep.tiers[k]
            .iter()
            .zip(&dep.classes[k])
            .filter(|(_, c)| **c == class)
            .map(|(u, _)| u.horizontal_distance(z_u).hypot(h))
            .fold(f64::INFINITY, f64::min)
    }))
}

/// How often each (tier, class) serves the user, plus the void frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationFrequencies {
    /// `[tier][class index]`.
    pub served: Vec<[f64; 2]>,
    pub void: f64,
    pub trials: usize,
}

pub fn association_frequencies(scenario: &Scenario, sim: &SimConfig, z_u: f64) -> Result<AssociationFrequencies> {
    scenario.validate()?;
    let radii = sim.radii(scenario)?;
    let picks = run_trials(sim, |rng| {
        let mut dep = sample_deployment(scenario, &radii, sim.sampling, rng);
        classify_links(&mut dep, scenario, z_u, rng);
        associate(&dep, scenario, z_u).map(|a| (a.tier, a.class))
    });
    let n = sim.trials as f64;
    let mut served = vec![[0.0; 2]; scenario.tiers.len()];
    let mut void = 0.0;
    for p in picks {
        match p {
            Some((k, c)) => served[k][c.index()] += 1.0 / n,
            None => void += 1.0 / n,
        }
    }
    Ok(AssociationFrequencies {
        served,
        void,
        trials: sim.trials,
    })
}

/// Empirical `E[exp(-s I)]` for each `s`, where `I` is the interference
/// from all UAVs outside the exclusion discs implied by a class-`class`
/// server of tier `j` at slant distance `r`.
pub fn empirical_laplace(
    scenario: &Scenario,
    sim: &SimConfig,
    j: usize,
    class: LinkClass,
    r: f64,
    z_u: f64,
    s_values: &[f64],
) -> Result<Vec<McEstimate>> {
    scenario.validate()?;
    if j >= scenario.tiers.len() {
        return Err(invalid("j", format!("tier index {j} out of range")));
    }
    let radii = sim.radii(scenario)?;
    let ch = &scenario.channel;
    let pj = scenario.tiers[j].power_w;
    let exclusion: Vec<[f64; 2]> = scenario
        .tiers
        .iter()
        .map(|tk| {
            LinkClass::ALL.map(|interf| {
                horizontal_from_slant(
                    exclusion_distance_unchecked(ch, class, interf, pj, tk, r),
                    tk.altitude_m,
                )
            })
        })
        .collect();
    let samples = run_trials(sim, |rng| {
        let mut dep = sample_deployment(scenario, &radii, sim.sampling, rng);
        classify_links(&mut dep, scenario, z_u, rng);
        let mut interference = 0.0;
        for (k, uavs) in dep.tiers.iter().enumerate() {
            let tk = &scenario.tiers[k];
            for (u, &c) in uavs.iter().zip(&dep.classes[k]) {
                let dh = u.horizontal_distance(z_u);
                if dh < exclusion[k][c.index()] {
                    continue;
                }
                let d = dh.hypot(tk.altitude_m);
                interference += ch.eta(c) * tk.power_w * sample_gain(c, ch, rng) * d.powf(-ch.alpha(c));
            }
        }
        s_values.iter().map(|s| (-s * interference).exp()).collect::<Vec<_>>()
    });
    Ok((0..s_values.len())
        .map(|i| {
            let col: Vec<f64> = samples.iter().map(|row| row[i]).collect();
            McEstimate::from_samples(&col, sim.seed)
        })
        .collect())
}
