//! The same distributions computed in the town-centre frame.
//!
//! UAV positions are written as `(l, θ)` around the centre with the user on
//! the positive axis at `z_u`. Discs around the user become angular windows
//! `|θ| ≤ φ(l)` from the law of cosines, and every quantity is a nested
//! two-dimensional integral. This route is far slower than [`LocalModel`]
//! and exists as an independent check on it.
//!
//! [`LocalModel`]: super::LocalModel

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::model::{
    exclusion_distance_unchecked, horizontal_from_slant, horizontal_user_to_uav_distance, link_probability, LinkClass,
    Scenario,
};
use crate::quadrature::{integrate_1d, integrate_2d_nested, integrate_semi_infinite, QuadResult, QuadSpec};

/// Half-width of the angular window of the disc of radius `rho` around the
/// user, seen on the circle of radius `l` around the centre.
fn window(z: f64, l: f64, rho: f64) -> f64 {
    if z == 0.0 || l == 0.0 {
        return if (z - l).abs() <= rho { PI } else { 0.0 };
    }
    ((l * l + z * z - rho * rho) / (2.0 * l * z)).clamp(-1.0, 1.0).acos()
}

struct Frame<'a> {
    scenario: &'a Scenario,
    k: usize,
    class: LinkClass,
    z: f64,
}

impl Frame<'_> {
    /// `l Λ(l) P^Q(d)`, the areal class intensity in polar measure.
    fn v(&self, l: f64, theta: f64) -> f64 {
        let tier = &self.scenario.tiers[self.k];
        let lam = self.scenario.tier_intensity(self.k, l);
        if lam == 0.0 {
            return 0.0;
        }
        let d = horizontal_user_to_uav_distance(self.z, l, theta);
        l * lam * link_probability(&self.scenario.channel, self.class, tier.altitude_m, d)
    }

    fn region(&self) -> f64 {
        self.scenario.region_radius()
    }

    /// Integral over `l ≥ lo` split at `cuts`, semi-infinite when the
    /// deployment region is the plane.
    fn integrate_l<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, cuts: &[f64], spec: &QuadSpec) -> QuadResult {
        let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
        pts.push(lo);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut acc = QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
        let mut add = |r: QuadResult| {
            acc.value += r.value;
            acc.error_estimate += r.error_estimate;
            acc.evaluations += r.evaluations;
            acc.converged &= r.converged;
        };
        for w in pts.windows(2) {
            add(integrate_1d(&f, w[0], w[1], spec));
        }
        let last = *pts.last().expect("nonempty");
        if hi.is_finite() {
            add(integrate_1d(&f, last, hi, spec));
        } else {
            let beta = self.scenario.tiers[self.k].beta;
            add(integrate_semi_infinite(&f, last, 1.0 / beta, spec));
        }
        acc
    }

    fn disc_mass(&self, rho: f64, spec: &QuadSpec) -> QuadResult {
        let lo = (self.z - rho).max(0.0);
        let hi = (self.z + rho).min(self.region());
        if hi <= lo {
            return QuadResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 0,
                converged: true,
            };
        }
        let mut cuts = vec![rho - self.z];
        cuts.retain(|&c| c > lo && c < hi);
        let mut pts = vec![lo];
        pts.extend(cuts);
        pts.push(hi);
        let mut acc = QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
        for w in pts.windows(2) {
            let r = integrate_2d_nested(
                |l, th| 2.0 * self.v(l, th),
                (w[0], w[1]),
                |l| Some((0.0, window(self.z, l, rho))),
                spec,
            );
            acc.value += r.value;
            acc.error_estimate += r.error_estimate;
            acc.evaluations += r.evaluations;
            acc.converged &= r.converged;
        }
        acc
    }

    fn plane_mass(&self, spec: &QuadSpec) -> QuadResult {
        let inner = QuadSpec {
            rel_tol: spec.rel_tol * 0.1,
            abs_tol: spec.abs_tol * 0.1,
            ..*spec
        };
        self.integrate_l(
            |l| 2.0 * integrate_1d(|th| self.v(l, th), 0.0, PI, &inner).value,
            0.0,
            self.region(),
            &[self.z],
            spec,
        )
    }
}

fn check(scenario: &Scenario, k: usize, z_u: f64) -> Result<()> {
    scenario.validate()?;
    if k >= scenario.tiers.len() {
        return Err(invalid("k", format!("tier index {k} out of range")));
    }
    if z_u < 0.0 || z_u.is_nan() {
        return Err(Error::NegativeDistance(z_u));
    }
    Ok(())
}

/// Expected class-`class` UAVs of tier `k` within horizontal distance `rho`
/// of the user.
pub fn disc_mass(scenario: &Scenario, k: usize, class: LinkClass, z_u: f64, rho: f64, spec: &QuadSpec) -> Result<f64> {
    check(scenario, k, z_u)?;
    Frame {
        scenario,
        k,
        class,
        z: z_u,
    }
    .disc_mass(rho, spec)
    .into_value()
}

/// Expected class-`class` UAVs of tier `k` over the whole deployment region.
pub fn plane_mass(scenario: &Scenario, k: usize, class: LinkClass, z_u: f64, spec: &QuadSpec) -> Result<f64> {
    check(scenario, k, z_u)?;
    Frame {
        scenario,
        k,
        class,
        z: z_u,
    }
    .plane_mass(spec)
    .into_value()
}

pub fn tagged_cdf(scenario: &Scenario, k: usize, class: LinkClass, r: f64, z_u: f64, spec: &QuadSpec) -> Result<f64> {
    check(scenario, k, z_u)?;
    let h = scenario.tiers[k].altitude_m;
    if r <= h {
        return Ok(0.0);
    }
    let m = disc_mass(scenario, k, class, z_u, horizontal_from_slant(r, h), spec)?;
    Ok(-(-m).exp_m1())
}

/// Tagged-distance density by differentiating the disc mass under the
/// integral sign. Only the moving angular window contributes; the
/// contributions of the moving radial limits cancel or vanish.
pub fn tagged_pdf(scenario: &Scenario, k: usize, class: LinkClass, r: f64, z_u: f64, spec: &QuadSpec) -> Result<f64> {
    check(scenario, k, z_u)?;
    let h = scenario.tiers[k].altitude_m;
    if r <= h {
        return Ok(0.0);
    }
    let rho = horizontal_from_slant(r, h);
    let frame = Frame {
        scenario,
        k,
        class,
        z: z_u,
    };
    let void = (-frame.disc_mass(rho, spec).into_value()?).exp();
    if z_u == 0.0 {
        return Ok(void * 2.0 * PI * r * frame.v(rho, 0.0) / rho);
    }
    let lo = (z_u - rho).abs();
    let hi = (z_u + rho).min(scenario.region_radius());
    if hi <= lo {
        return Ok(0.0);
    }
    let z = z_u;
    let res = integrate_1d(
        |l| {
            // 4 l² z² - (l² + z² - ρ²)², factored to keep precision
            let q = (rho * rho - (l - z).powi(2)) * ((l + z).powi(2) - rho * rho);
            if q <= 0.0 {
                return 0.0;
            }
            4.0 * r * frame.v(l, window(z, l, rho)) / q.sqrt()
        },
        lo,
        hi,
        spec,
    );
    Ok(void * res.into_value()?)
}

pub fn association_probability(
    scenario: &Scenario,
    j: usize,
    class: LinkClass,
    r: f64,
    z_u: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check(scenario, j, z_u)?;
    let tj = &scenario.tiers[j];
    if r < tj.altitude_m {
        return Err(Error::BelowAltitude {
            r,
            altitude: tj.altitude_m,
        });
    }
    let mut log_p = 0.0;
    for (k, tk) in scenario.tiers.iter().enumerate() {
        for interf in LinkClass::ALL {
            if k == j && interf == class {
                continue;
            }
            let d = exclusion_distance_unchecked(&scenario.channel, class, interf, tj.power_w, tk, r);
            let zex = horizontal_from_slant(d, tk.altitude_m);
            log_p -= disc_mass(scenario, k, interf, z_u, zex, spec)?;
        }
    }
    Ok(log_p.exp())
}

/// Interference Laplace transform over the three geometric regimes of the
/// exclusion disc: clear of the centre circle, containing it, or crossing
/// it. The clamped window handles all three at once.
pub fn interference_laplace(
    scenario: &Scenario,
    j: usize,
    class: LinkClass,
    s: f64,
    r: f64,
    z_u: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    check(scenario, j, z_u)?;
    let tj = &scenario.tiers[j];
    if r < tj.altitude_m {
        return Err(Error::BelowAltitude {
            r,
            altitude: tj.altitude_m,
        });
    }
    let ch = &scenario.channel;
    let inner = QuadSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        ..*spec
    };
    let mut log_l = 0.0;
    for (k, tk) in scenario.tiers.iter().enumerate() {
        if tk.lambda == 0.0 {
            continue;
        }
        for interf in LinkClass::ALL {
            let d = exclusion_distance_unchecked(ch, class, interf, tj.power_w, tk, r);
            let zex = horizontal_from_slant(d, tk.altitude_m);
            let frame = Frame {
                scenario,
                k,
                class: interf,
                z: z_u,
            };
            let m = f64::from(ch.shape(interf));
            let gain = s * ch.eta(interf) * tk.power_w / m;
            let alpha = ch.alpha(interf);
            let h2 = tk.altitude_m * tk.altitude_m;
            let w = |l: f64, th: f64| {
                let dh = horizontal_user_to_uav_distance(z_u, l, th);
                let x = gain * (dh * dh + h2).powf(-0.5 * alpha);
                1.0 - (1.0 + x).powf(-m)
            };
            let res = frame.integrate_l(
                |l| {
                    let lo = window(z_u, l, zex);
                    if lo >= PI {
                        return 0.0;
                    }
                    2.0 * integrate_1d(|th| frame.v(l, th) * w(l, th), lo, PI, &inner).value
                },
                0.0,
                scenario.region_radius(),
                &[(z_u - zex).abs(), z_u + zex, z_u],
                spec,
            );
            log_l -= res.into_value()?;
        }
    }
    Ok(log_l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{AnalyticOptions, LocalModel};
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn spec() -> QuadSpec {
        QuadSpec::default().with_rel_tol(1e-8).with_abs_tol(1e-14)
    }

    #[test]
    fn window_limits() {
        assert_eq!(window(100.0, 50.0, 200.0), PI);
        assert_eq!(window(100.0, 400.0, 200.0), 0.0);
        assert_eq!(window(0.0, 50.0, 60.0), PI);
        assert!((window(100.0, 100.0, 100.0) - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disc_mass_agrees_with_ring_frame() {
        let sc = fixtures::three_tier_table2();
        for &z in &[0.0, 500.0, 2500.0] {
            let model = LocalModel::new(&sc, z, &AnalyticOptions::precise()).unwrap();
            for &rho in &[120.0, 600.0, 1800.0] {
                for class in LinkClass::ALL {
                    let polar = disc_mass(&sc, 1, class, z, rho, &spec()).unwrap();
                    let ring = model.class_mass(1, class, rho);
                    assert_relative_eq!(polar, ring, max_relative = 1e-6, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn leibniz_pdf_matches_ring_frame() {
        let sc = fixtures::three_tier_table2();
        for &z in &[0.0, 500.0] {
            let model = LocalModel::new(&sc, z, &AnalyticOptions::precise()).unwrap();
            for &r in &[180.0, 400.0, 900.0] {
                let a = tagged_pdf(&sc, 0, LinkClass::Los, r, z, &spec()).unwrap();
                let b = model.tagged_pdf(0, LinkClass::Los, r).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn association_agrees_with_ring_frame() {
        let sc = fixtures::three_tier_table2();
        let model = LocalModel::new(&sc, 700.0, &AnalyticOptions::precise()).unwrap();
        for class in LinkClass::ALL {
            let a = association_probability(&sc, 1, class, 300.0, 700.0, &spec()).unwrap();
            let b = model.association_probability(1, class, 300.0).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn laplace_agrees_with_ring_frame() {
        let sc = fixtures::three_tier_table2();
        let z = 400.0;
        let model = LocalModel::new(&sc, z, &AnalyticOptions::precise()).unwrap();
        let loose = QuadSpec::default().with_rel_tol(1e-6).with_abs_tol(1e-12);
        for &s in &[1e5, 1e6, 1e7] {
            let a = interference_laplace(&sc, 0, LinkClass::Los, s, 150.0, z, &loose).unwrap();
            let b = model.interference_laplace(0, LinkClass::Los, s, 150.0).unwrap();
            assert!((a - b).abs() < 1e-5, "s={s}: polar {a} ring {b}");
        }
        assert_eq!(
            interference_laplace(&sc, 0, LinkClass::Los, 0.0, 150.0, z, &loose).unwrap(),
            1.0
        );
    }
}
