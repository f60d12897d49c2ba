//! Local and overall SINR coverage.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::model::{gamma2_cdf, LinkClass, UserDensity};
use crate::quadrature::{default_step, integrate_1d, nth_derivative, QuadSpec};

use super::local::LocalModel;
use super::{mu_threshold, AnalyticMethod, Threshold};

/// Largest Nakagami shape the exact path accepts.
pub const MAX_EXACT_SHAPE: u32 = 4;

/// Tightest inner tolerance worth asking for; finite differences of the
/// Laplace transform need it to stay smooth.
const EXACT_LAPLACE_TOL: f64 = 1e-12;

fn binomial(m: u32, n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(m - n + i) / f64::from(i))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Records the first failure raised inside a quadrature callback.
struct FirstError(RefCell<Option<Error>>);

impl FirstError {
    fn new() -> Self {
        FirstError(RefCell::new(None))
    }

    fn record(&self, e: Error) {
        self.0.borrow_mut().get_or_insert(e);
    }

    fn finish<T>(self, value: T) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

impl LocalModel<'_> {
    /// `L_U(s) = exp(-σ² s) L_I(s)`.
    fn signal_laplace(&self, j: usize, class: LinkClass, s: f64, r: f64, tol: f64, errs: &FirstError) -> f64 {
        let res = self.neg_log_laplace(j, class, s, r, tol);
        if !res.converged {
            errs.record(Error::Quadrature(format!(
                "interference integral at s = {s:e}, r = {r} m: estimate {:e} +- {:e}",
                res.value, res.error_estimate
            )));
        }
        (-self.scenario().channel.noise_w * s - res.value).exp()
    }

    /// Conditional coverage given service by the tagged class-`class` UAV
    /// of tier `j` at slant distance `r`.
    fn conditional_coverage(
        &self,
        j: usize,
        class: LinkClass,
        r: f64,
        gamma: f64,
        method: AnalyticMethod,
        errs: &FirstError,
    ) -> f64 {
        let channel = &self.scenario().channel;
        let tier = &self.scenario().tiers[j];
        let m = channel.shape(class);
        let mu = mu_threshold(channel, tier, class, r, gamma);
        match method {
            AnalyticMethod::Approx => {
                let tol = self.options().laplace_rel_tol;
                let omega = factorial(m).powf(-1.0 / f64::from(m));
                (1..=m)
                    .map(|n| {
                        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                        sign * binomial(m, n) * self.signal_laplace(j, class, f64::from(n) * omega * mu, r, tol, errs)
                    })
                    .sum()
            }
            AnalyticMethod::Exact => {
                let tol = self.options().laplace_rel_tol.min(EXACT_LAPLACE_TOL);
                let f = |s: f64| self.signal_laplace(j, class, s, r, tol, errs);
                let mut sum = 0.0;
                for n in 0..m {
                    let d = match nth_derivative(&f, mu, n, default_step(mu, n)) {
                        Ok(d) => d,
                        Err(e) => {
                            errs.record(e);
                            return f64::NAN;
                        }
                    };
                    sum += (-mu).powi(n as i32) / factorial(n) * d;
                }
                sum
            }
        }
    }

    /// Horizontal serving distances where an exclusion radius leaves the
    /// floor set by an interferer altitude.
    fn association_kinks(&self, j: usize, class: LinkClass) -> Vec<f64> {
        let sc = self.scenario();
        let ch = &sc.channel;
        let hj = sc.tiers[j].altitude_m;
        let mut out = Vec::new();
        for tier_k in &sc.tiers {
            for interf in LinkClass::ALL {
                let (aa, ai) = (ch.alpha(class), ch.alpha(interf));
                let ratio = ch.eta(interf) * tier_k.power_w / (ch.eta(class) * sc.tiers[j].power_w);
                let r = (tier_k.altitude_m / ratio.powf(1.0 / ai)).powf(ai / aa);
                if r > hj {
                    out.push(((r - hj) * (r + hj)).sqrt());
                }
            }
        }
        out
    }

    fn tier_class_coverage(&self, j: usize, class: LinkClass, gamma: f64, method: AnalyticMethod) -> Result<f64> {
        if self.total_mass(j, class) == 0.0 {
            return Ok(0.0);
        }
        let h = self.scenario().tiers[j].altitude_m;
        let Some(cuts) = self.serving_cuts(j, class) else {
            return Ok(0.0);
        };
        let outer = QuadSpec {
            abs_tol: self.options().quad.rel_tol * 1e-2,
            ..self.options().quad
        };
        let errs = FirstError::new();
        let integrand = |rho: f64| {
            let r = rho.hypot(h);
            let weight = (-self.class_mass(j, class, rho) + self.log_association(j, class, r)).exp()
                * self.class_density(j, class, rho);
            if weight == 0.0 {
                return 0.0;
            }
            weight * self.conditional_coverage(j, class, r, gamma, method, &errs)
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let part = integrate_1d(integrand, w[0], w[1], &outer);
            if !part.converged {
                errs.record(Error::Quadrature(format!(
                    "coverage integral of tier {} {class} over [{}, {}] m",
                    j + 1,
                    w[0],
                    w[1]
                )));
            }
            total += part.value;
        }
        errs.finish(total)
    }

    /// Horizontal panel ends for integrals over the serving distance, or
    /// `None` when the tagged UAV is almost surely absent.
    fn serving_cuts(&self, j: usize, class: LinkClass) -> Option<Vec<f64>> {
        let reach = self.tagged_reach(j, class, self.options().residual_mass);
        if reach == 0.0 {
            return None;
        }
        let mut cuts = vec![0.0, self.z_u(), reach];
        cuts.extend_from_slice(self.breaks(j));
        cuts.extend(self.association_kinks(j, class));
        cuts.retain(|&c| (0.0..=reach).contains(&c));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        Some(cuts)
    }

    /// Probability that the user is served by a class-`class` UAV of tier
    /// `j`: the tagged density weighted by the association probability.
    pub fn association_total(&self, j: usize, class: LinkClass) -> Result<f64> {
        if j >= self.scenario().tiers.len() {
            return Err(crate::error::invalid("j", format!("tier index {j} out of range")));
        }
        if self.total_mass(j, class) == 0.0 {
            return Ok(0.0);
        }
        let h = self.scenario().tiers[j].altitude_m;
        let Some(cuts) = self.serving_cuts(j, class) else {
            return Ok(0.0);
        };
        let spec = QuadSpec {
            abs_tol: self.options().quad.rel_tol * 1e-2,
            ..self.options().quad
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let part = integrate_1d(
                |rho| {
                    (-self.class_mass(j, class, rho) + self.log_association(j, class, rho.hypot(h))).exp()
                        * self.class_density(j, class, rho)
                },
                w[0],
                w[1],
                &spec,
            );
            total += part.into_value()?;
        }
        Ok(total)
    }

    /// Local coverage probability of this user.
    pub fn coverage(&self, threshold: &Threshold, method: AnalyticMethod) -> Result<f64> {
        let sc = self.scenario();
        threshold.check(sc.tiers.len())?;
        if method == AnalyticMethod::Exact {
            for class in LinkClass::ALL {
                let m = sc.channel.shape(class);
                if m > MAX_EXACT_SHAPE {
                    return Err(Error::ShapeTooLarge(m));
                }
            }
        }
        let mut total = 0.0;
        for j in 0..sc.tiers.len() {
            for class in LinkClass::ALL {
                total += self.tier_class_coverage(j, class, threshold.for_tier(j), method)?;
            }
        }
        Ok(total.clamp(0.0, 1.0))
    }
}

/// Offset of the user at quantile `u` of the user mass inside `region`.
pub(crate) fn user_quantile(users: &UserDensity, region: f64, u: f64) -> f64 {
    if users.beta_u == 0.0 {
        return region * u.sqrt();
    }
    let b = users.beta_u;
    let target = u * if region.is_finite() {
        gamma2_cdf(b * region)
    } else {
        1.0
    };
    let (mut lo, mut hi) = (0.0, if region.is_finite() { b * region } else { 1.0 });
    while !region.is_finite() && gamma2_cdf(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma2_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi) / b
}

/// Share of the user mass beyond the last panel of the overall average on
/// an unbounded plane.
const USER_TAIL: f64 = 1e-12;

/// User-mass quantiles that split the overall average into panels.
const USER_PANELS: [f64; 2] = [0.9, 0.999];

/// Averages a local coverage profile over the user distribution inside
/// `region` (pass `f64::INFINITY` for the plane).
///
/// The integral runs over the user offset, split at fixed user-mass
/// quantiles so every panel carries a comparable share of the weight.
pub fn overall_from_local<F>(users: &UserDensity, region: f64, local: F, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if users.beta_u == 0.0 && !region.is_finite() {
        return Err(Error::DivergentCount);
    }
    let b = users.beta_u;
    let norm = if b == 0.0 {
        0.5 * region * region
    } else if region.is_finite() {
        gamma2_cdf(b * region) / (b * b)
    } else {
        1.0 / (b * b)
    };
    let upper = if region.is_finite() {
        region
    } else {
        user_quantile(users, region, 1.0 - USER_TAIL)
    };
    let mut cuts = vec![0.0];
    cuts.extend(USER_PANELS.iter().map(|&u| user_quantile(users, region, u)));
    cuts.push(upper);
    let errs = FirstError::new();
    let outer = QuadSpec {
        abs_tol: spec.rel_tol,
        ..*spec
    };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for w in cuts.windows(2) {
        let res = integrate_1d(
            |z| match local(z) {
                Ok(v) => v * z * (-b * z).exp() / norm,
                Err(e) => {
                    errs.record(e);
                    0.0
                }
            },
            w[0],
            w[1],
            &outer,
        );
        value += res.value;
        error += res.error_estimate;
        converged &= res.converged;
    }
    let value = errs.finish(value)?;
    if !converged && error > outer.abs_tol.max(outer.rel_tol * value.abs()) {
        return Err(Error::Quadrature(format!(
            "overall coverage: estimate {value} +- {error:e}"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticOptions;
    use crate::fixtures;
    use crate::model::db_to_linear;

    #[test]
    fn association_totals_complete_with_void() {
        let sc = fixtures::three_tier_table2();
        let model = LocalModel::new(&sc, 700.0, &AnalyticOptions::default()).unwrap();
        let mut served = 0.0;
        let mut mass = 0.0;
        for j in 0..3 {
            for class in LinkClass::ALL {
                served += model.association_total(j, class).unwrap();
                mass += model.total_mass(j, class);
            }
        }
        assert!((served + (-mass).exp() - 1.0).abs() < 1e-4, "{served}");
        assert!(model.association_total(3, LinkClass::Los).is_err());
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(3, 3), 1.0);
        assert_eq!(factorial(4), 24.0);
        assert_eq!(factorial(0), 1.0);
    }

    #[test]
    fn user_quantiles_invert_the_mass_cdf() {
        let users = UserDensity {
            lambda_u: 1e-3,
            beta_u: 5e-3,
        };
        for &u in &[0.01, 0.5, 0.999] {
            let z = user_quantile(&users, f64::INFINITY, u);
            assert!((gamma2_cdf(5e-3 * z) - u).abs() < 1e-12);
            let zr = user_quantile(&users, 1000.0, u);
            assert!((gamma2_cdf(5e-3 * zr) / gamma2_cdf(5.0) - u).abs() < 1e-12);
        }
        let flat = UserDensity { beta_u: 0.0, ..users };
        assert!((user_quantile(&flat, 100.0, 0.25) - 50.0).abs() < 1e-12);
        // the 99.9% mass radius used by the floor constraint
        let z999 = user_quantile(&users, f64::INFINITY, 0.999);
        assert!((z999 - 1846.0).abs() < 1.0, "{z999}");
    }

    #[test]
    fn constant_local_coverage_averages_to_itself() {
        let users = UserDensity {
            lambda_u: 1e-3,
            beta_u: 5e-3,
        };
        let v = overall_from_local(&users, f64::INFINITY, |_| Ok(0.37), &QuadSpec::default()).unwrap();
        assert!((v - 0.37).abs() < 1e-12);
        let flat = UserDensity { beta_u: 0.0, ..users };
        assert!(overall_from_local(&flat, f64::INFINITY, |_| Ok(0.37), &QuadSpec::default()).is_err());
        let v = overall_from_local(&flat, 3000.0, |_| Ok(0.5), &QuadSpec::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_average_matches_direct_quadrature() {
        let users = UserDensity {
            lambda_u: 1e-3,
            beta_u: 5e-3,
        };
        let local = |z: f64| (-z / 700.0).exp();
        let v = overall_from_local(&users, f64::INFINITY, |z| Ok(local(z)), &QuadSpec::default()).unwrap();
        // int z e^{-bz} e^{-z/c} dz / int z e^{-bz} dz = (b / (b + 1/c))^2
        let b: f64 = 5e-3;
        let expected = (b / (b + 1.0 / 700.0f64)).powi(2);
        assert!((v - expected).abs() < 1e-6);
    }

    #[test]
    fn very_high_threshold_is_never_covered() {
        let sc = fixtures::three_tier_table2();
        let model = LocalModel::new(&sc, 0.0, &AnalyticOptions::default()).unwrap();
        let p = model
            .coverage(&Threshold::Common(db_to_linear(60.0)), AnalyticMethod::Approx)
            .unwrap();
        assert!(p < 0.01);
    }

    #[test]
    fn approx_and_exact_agree_for_unit_shapes() {
        let mut sc = fixtures::three_tier_table2();
        sc.channel.m_los = 1;
        let model = LocalModel::new(&sc, 300.0, &AnalyticOptions::default()).unwrap();
        let g = Threshold::Common(db_to_linear(-15.0));
        let a = model.coverage(&g, AnalyticMethod::Approx).unwrap();
        let e = model.coverage(&g, AnalyticMethod::Exact).unwrap();
        assert!((a - e).abs() < 1e-9, "{a} vs {e}");
    }

    #[test]
    fn exact_rejects_large_shapes() {
        let mut sc = fixtures::three_tier_table2();
        sc.channel.m_los = 5;
        let model = LocalModel::new(&sc, 0.0, &AnalyticOptions::default()).unwrap();
        let g = Threshold::Common(0.1);
        assert_eq!(model.coverage(&g, AnalyticMethod::Exact), Err(Error::ShapeTooLarge(5)));
        assert!(model.coverage(&g, AnalyticMethod::Approx).is_ok());
    }
}
