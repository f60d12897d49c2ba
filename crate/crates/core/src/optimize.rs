//! Choosing per-tier homogeneity parameters that maximize overall coverage
//! under a UAV budget and a local coverage floor.
//!
//! Two searches are provided: an exhaustive grid over β and an alternate
//! maximization that moves UAVs between tiers in small steps while the total
//! expected count stays fixed.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{overall_coverage, user_quantile, AnalyticMethod, AnalyticOptions, LocalModel, Threshold};
use crate::error::{invalid, Error, Result};
use crate::fixtures::log_space;
use crate::model::{expected_uav_count, Scenario, TierConfig, UserDensity};

/// Number of checkpoints of the default floor grid.
pub const FLOOR_GRID_POINTS: usize = 25;

/// User-mass quantile of the farthest floor checkpoint.
pub const FLOOR_GRID_MASS: f64 = 0.999;

/// How λ responds when a sweep changes β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRule {
    /// λ stays at its template value.
    #[default]
    Fixed,
    /// λ is rescaled so each tier keeps its template expected count.
    HoldCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    /// Template whose altitudes, powers and λ are kept; β is searched.
    pub scenario: Scenario,
    /// Threshold of the maximized overall coverage.
    pub gamma1: f64,
    /// Threshold of the local floor.
    pub gamma2: f64,
    /// Minimum local coverage at every checkpoint; `None` drops the floor.
    pub floor: Option<f64>,
    /// Cap on the total expected UAV count.
    pub n_max: f64,
    pub z_grid: Vec<f64>,
    /// One β axis per tier for the grid search.
    pub beta_axes: Vec<Vec<f64>>,
    pub lambda_rule: LambdaRule,
    pub options: AnalyticOptions,
}

impl OptProblem {
    /// Problem with a 0.95 floor, the default checkpoint grid, no β axes
    /// and search-grade analytic settings.
    pub fn new(scenario: Scenario, gamma1: f64, gamma2: f64, n_max: f64) -> Self {
        let z_grid = default_z_grid(&scenario.users, scenario.region_radius(), FLOOR_GRID_POINTS);
        OptProblem {
            scenario,
            gamma1,
            gamma2,
            floor: Some(0.95),
            n_max,
            z_grid,
            beta_axes: Vec::new(),
            lambda_rule: LambdaRule::Fixed,
            options: AnalyticOptions::fast(),
        }
    }

    /// The same log-spaced axis for every tier.
    pub fn with_common_axis(mut self, axis: Vec<f64>) -> Self {
        self.beta_axes = vec![axis; self.scenario.tiers.len()];
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.options.validate()?;
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {g}")));
            }
        }
        if let Some(f) = self.floor {
            if !(f > 0.0 && f < 1.0) {
                return Err(invalid("floor", format!("must lie in (0, 1), got {f}")));
            }
            if self.z_grid.is_empty() {
                return Err(invalid("z_grid", "must not be empty"));
            }
            if !self.z_grid.contains(&0.0) {
                return Err(invalid("z_grid", "must include the centre"));
            }
        }
        if !(self.n_max > 0.0) {
            return Err(invalid("n_max", format!("must be positive, got {}", self.n_max)));
        }
        if self.z_grid.iter().any(|z| !(*z >= 0.0 && z.is_finite())) {
            return Err(invalid("z_grid", "offsets must be finite and non-negative"));
        }
        for axis in &self.beta_axes {
            if axis.is_empty() || axis.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
                return Err(invalid(
                    "beta_axes",
                    "axes must be non-empty with finite non-negative values",
                ));
            }
        }
        Ok(())
    }

    /// Template with the given β values, λ adjusted by the rule.
    pub fn with_betas(&self, betas: &[f64]) -> Result<Scenario> {
        if betas.len() != self.scenario.tiers.len() {
            return Err(invalid(
                "betas",
                format!("{} values for {} tiers", betas.len(), self.scenario.tiers.len()),
            ));
        }
        let region = self.scenario.region_radius();
        let mut sc = self.scenario.clone();
        for (tier, &beta) in sc.tiers.iter_mut().zip(betas) {
            let template = *tier;
            tier.beta = beta;
            if self.lambda_rule == LambdaRule::HoldCount && tier.lambda > 0.0 {
                let want = expected_uav_count(&template, region)?;
                let unit = expected_uav_count(&TierConfig { lambda: 1.0, ..*tier }, region)?;
                tier.lambda = want / unit;
            }
        }
        Ok(sc)
    }
}

/// The centre plus `n - 1` log-spaced offsets from 10 m out to the radius
/// holding [`FLOOR_GRID_MASS`] of the users, farthest first.
pub fn default_z_grid(users: &UserDensity, region: f64, n: usize) -> Vec<f64> {
    let far = if users.beta_u == 0.0 && !region.is_finite() {
        return vec![0.0];
    } else {
        user_quantile(users, region, FLOOR_GRID_MASS)
    };
    let mut grid = log_space(10.0_f64.min(far), far, n.saturating_sub(1).max(1));
    grid.reverse();
    grid.push(0.0);
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountCheck {
    pub count: f64,
    pub feasible: bool,
}

/// Total expected UAV count over the deployment region against the cap.
pub fn count_constraint(scenario: &Scenario, n_max: f64) -> Result<CountCheck> {
    let region = scenario.region_radius();
    let mut count = 0.0;
    for tier in &scenario.tiers {
        count += expected_uav_count(tier, region)?;
    }
    Ok(CountCheck {
        count,
        feasible: count <= n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorCheck {
    pub feasible: bool,
    /// Checkpoint with the lowest coverage seen, or the first violation.
    pub worst_z: f64,
    pub worst_value: f64,
}

/// Local coverage at every checkpoint against the floor, in grid order.
/// Stops at the first violation.
pub fn floor_constraint(
    scenario: &Scenario,
    gamma2: f64,
    floor: f64,
    z_grid: &[f64],
    opts: &AnalyticOptions,
) -> Result<FloorCheck> {
    if z_grid.is_empty() {
        return Err(invalid("z_grid", "must not be empty"));
    }
    let threshold = Threshold::Common(gamma2);
    let mut worst = FloorCheck {
        feasible: true,
        worst_z: z_grid[0],
        worst_value: f64::INFINITY,
    };
    for &z in z_grid {
        let value = LocalModel::new(scenario, z, opts)?.coverage(&threshold, AnalyticMethod::Approx)?;
        if value < worst.worst_value {
            worst.worst_z = z;
            worst.worst_value = value;
        }
        if value < floor {
            return Ok(FloorCheck {
                feasible: false,
                worst_z: z,
                worst_value: value,
            });
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    CountCap,
    FloorViolation,
}

/// One evaluated point of a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub count: f64,
    /// Overall coverage at `gamma1`; `None` when infeasible.
    pub value: Option<f64>,
    pub infeasible: Option<Infeasibility>,
    pub floor: Option<FloorCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_betas: Vec<f64>,
    pub best_value: f64,
    /// Every evaluated point in search order.
    pub map: Vec<GridPoint>,
    /// Objective evaluations actually computed, cache hits excluded.
    pub evaluations: usize,
    /// Objective after each accepted alternate-maximization step.
    pub history: Vec<f64>,
}

fn key(sc: &Scenario) -> Vec<u64> {
    sc.tiers
        .iter()
        .flat_map(|t| [t.beta.to_bits(), t.lambda.to_bits()])
        .collect()
}

/// Evaluates points with a cache keyed by the tier parameters.
struct Evaluator<'a> {
    problem: &'a OptProblem,
    cache: Mutex<HashMap<Vec<u64>, GridPoint>>,
    fresh: Mutex<usize>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a OptProblem) -> Self {
        Evaluator {
            problem,
            cache: Mutex::new(HashMap::new()),
            fresh: Mutex::new(0),
        }
    }

    fn point(&self, sc: &Scenario) -> Result<GridPoint> {
        let k = key(sc);
        if let Some(p) = self.cache.lock().expect("cache lock").get(&k) {
            return Ok(p.clone());
        }
        let p = self.problem;
        let count = count_constraint(sc, p.n_max)?;
        let mut point = GridPoint {
            betas: sc
                .tiers
                .iter()
                .map(|t| if t.lambda > 0.0 { t.beta } else { f64::INFINITY })
                .collect(),
            lambdas: sc.tiers.iter().map(|t| t.lambda).collect(),
            count: count.count,
            value: None,
            infeasible: None,
            floor: None,
        };
        // empty tiers add nothing but would still shape the quadrature panels
        let active = Scenario {
            tiers: sc.tiers.iter().copied().filter(|t| t.lambda > 0.0).collect(),
            ..sc.clone()
        };
        let sc = if active.tiers.is_empty() { sc } else { &active };
        if !count.feasible {
            point.infeasible = Some(Infeasibility::CountCap);
        } else {
            let floor_ok = match p.floor {
                Some(floor) => {
                    let check = floor_constraint(sc, p.gamma2, floor, &p.z_grid, &p.options)?;
                    point.floor = Some(check);
                    check.feasible
                }
                None => true,
            };
            if floor_ok {
                point.value = Some(overall_coverage(sc, p.gamma1, AnalyticMethod::Approx, &p.options)?);
                *self.fresh.lock().expect("counter lock") += 1;
            } else {
                point.infeasible = Some(Infeasibility::FloorViolation);
            }
        }
        self.cache.lock().expect("cache lock").insert(k, point.clone());
        Ok(point)
    }

    fn evaluations(&self) -> usize {
        *self.fresh.lock().expect("counter lock")
    }
}

/// Index tuples of the Cartesian product of the axes, first axis slowest.
fn grid_indices(axes: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.len()).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

/// Evaluates every point of the β grid and returns the best feasible one.
/// Ties go to the point that comes first in grid order.
pub fn grid_search(problem: &OptProblem) -> Result<OptResult> {
    problem.validate()?;
    if problem.beta_axes.len() != problem.scenario.tiers.len() {
        return Err(invalid(
            "beta_axes",
            format!(
                "{} axes for {} tiers",
                problem.beta_axes.len(),
                problem.scenario.tiers.len()
            ),
        ));
    }
    let eval = Evaluator::new(problem);
    let points: Vec<Vec<f64>> = grid_indices(&problem.beta_axes)
        .into_iter()
        .map(|idx| idx.iter().zip(&problem.beta_axes).map(|(&i, a)| a[i]).collect())
        .collect();
    let map = points
        .par_iter()
        .map(|betas| eval.point(&problem.with_betas(betas)?))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in map.iter().enumerate() {
        if let Some(v) = p.value {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (i, best_value) = best.ok_or(Error::NoFeasiblePoint)?;
    Ok(OptResult {
        best_betas: points[i].clone(),
        best_value,
        map,
        evaluations: eval.evaluations(),
        history: Vec::new(),
    })
}

/// Step schedule of [`alternate_maximization`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltMaxSettings {
    /// Count moved per step as a share of the total budget.
    pub step_fraction: f64,
    /// Steps per tier and round.
    pub max_steps: usize,
    pub max_rounds: usize,
    /// Smallest objective gain that counts as an improvement.
    pub min_gain: f64,
}

impl Default for AltMaxSettings {
    fn default() -> Self {
        AltMaxSettings {
            step_fraction: 1.0 / 40.0,
            max_steps: 40,
            max_rounds: 3,
            min_gain: 1e-5,
        }
    }
}

/// β at which a tier of the given λ holds `count` UAVs in `region`;
/// infinite for an empty tier.
pub fn beta_for_count(tier: &TierConfig, region: f64, count: f64) -> Result<f64> {
    if count <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let at = |beta: f64| expected_uav_count(&TierConfig { beta, ..*tier }, region);
    if region.is_finite() && at(0.0)? <= count {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-30.0_f64, 5.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid.exp())? > count {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn scenario_from_counts(problem: &OptProblem, counts: &[f64]) -> Result<Scenario> {
    let region = problem.scenario.region_radius();
    let mut sc = problem.scenario.clone();
    for (tier, &n) in sc.tiers.iter_mut().zip(counts) {
        let beta = beta_for_count(tier, region, n)?;
        if beta.is_infinite() {
            tier.lambda = 0.0;
        } else {
            tier.beta = beta;
        }
    }
    Ok(sc)
}

/// Coordinate ascent over tiers in order. For tier `k` each step moves
/// `step_fraction` of the budget into `k` from whichever earlier tier gives
/// the best objective, lowering `β_k` and raising that tier's β. Steps stop
/// once the objective stops improving; rounds repeat until one changes
/// nothing.
///
/// `start` gives the initial β per tier; `f64::INFINITY` marks an empty tier.
pub fn alternate_maximization(problem: &OptProblem, start: &[f64], settings: &AltMaxSettings) -> Result<OptResult> {
    problem.validate()?;
    if start.len() != problem.scenario.tiers.len() {
        return Err(invalid(
            "start",
            format!("{} values for {} tiers", start.len(), problem.scenario.tiers.len()),
        ));
    }
    if !(settings.step_fraction > 0.0 && settings.step_fraction <= 1.0) {
        return Err(invalid("step_fraction", "must lie in (0, 1]"));
    }
    let region = problem.scenario.region_radius();
    let mut counts = Vec::with_capacity(start.len());
    for (tier, &beta) in problem.scenario.tiers.iter().zip(start) {
        counts.push(if beta.is_infinite() {
            0.0
        } else {
            expected_uav_count(&TierConfig { beta, ..*tier }, region)?
        });
    }
    let budget: f64 = counts.iter().sum();
    let eval = Evaluator::new(problem);
    let mut initial = problem.scenario.clone();
    for (tier, &beta) in initial.tiers.iter_mut().zip(start) {
        if beta.is_infinite() {
            tier.lambda = 0.0;
        } else {
            tier.beta = beta;
        }
    }
    let first = eval.point(&initial)?;
    let Some(mut best) = first.value else {
        return Err(Error::InfeasibleStart(match first.infeasible {
            Some(Infeasibility::CountCap) => format!("expected count {} exceeds the cap", first.count),
            _ => "local coverage floor violated".into(),
        }));
    };
    let mut map = vec![first.clone()];
    let mut best_point = first;
    let mut history = vec![best];
    let step = settings.step_fraction * budget;
    for _ in 0..settings.max_rounds {
        let mut moved = false;
        for k in 1..counts.len() {
            for _ in 0..settings.max_steps {
                let candidates: Vec<(usize, Vec<f64>)> = (0..k)
                    .filter(|&j| counts[j] > 0.0)
                    .map(|j| {
                        let mut c = counts.clone();
                        let amount = step.min(c[j]);
                        c[j] -= amount;
                        c[k] += amount;
                        (j, c)
                    })
                    .collect();
                if candidates.is_empty() {
                    break;
                }
                let tried = candidates
                    .par_iter()
                    .map(|(_, c)| eval.point(&scenario_from_counts(problem, c)?))
                    .collect::<Result<Vec<_>>>()?;
                map.extend(tried.iter().cloned());
                let pick = tried
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.value.map(|v| (i, v)))
                    .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                        Some((_, b)) if b >= v => acc,
                        _ => Some((i, v)),
                    });
                match pick {
                    Some((i, v)) if v > best + settings.min_gain => {
                        best = v;
                        counts = candidates[i].1.clone();
                        best_point = tried[i].clone();
                        history.push(v);
                        moved = true;
                    }
                    _ => break,
                }
            }
        }
        if !moved {
            break;
        }
    }
    Ok(OptResult {
        best_betas: best_point.betas.clone(),
        best_value: best,
        map,
        evaluations: eval.evaluations(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::db_to_linear;
    use std::f64::consts::PI;

    fn plane(mut sc: Scenario) -> Scenario {
        sc.region_radius_m = None;
        sc
    }

    #[test]
    fn count_constraint_closed_forms() {
        let mut sc = plane(fixtures::fig3().scenario());
        sc.tiers[0].beta = 0.02;
        sc.tiers[1].beta = 0.02;
        let c = count_constraint(&sc, 1000.0).unwrap();
        assert!((c.count - 2.0 * 2.0 * PI * 4e-5 / 4e-4).abs() < 1e-9);
        assert!(c.feasible);
        for t in &mut sc.tiers {
            t.lambda = 4e-6;
            t.beta = 1e-3;
        }
        let c = count_constraint(&sc, 1000.0).unwrap();
        assert!((c.count - 50.27).abs() < 0.01);
        for t in &mut sc.tiers {
            t.beta = 1e-4;
        }
        let c = count_constraint(&sc, 1000.0).unwrap();
        assert!((c.count - 5026.5).abs() < 0.1);
        assert!(!c.feasible);
    }

    #[test]
    fn count_is_monotone_in_beta() {
        let sc = fixtures::fig3().scenario();
        let grid = fixtures::fig3().beta_grid();
        let mut last = f64::INFINITY;
        for &b in &grid {
            let mut s = sc.clone();
            s.tiers[0].beta = b;
            let c = count_constraint(&s, 1e9).unwrap().count;
            assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn beta_for_count_inverts_the_count() {
        let sc = fixtures::one_tier_table2(100);
        let region = sc.region_radius();
        let n = expected_uav_count(&sc.tiers[0], region).unwrap();
        let b = beta_for_count(&sc.tiers[0], region, n).unwrap();
        assert!((b - 3.2e-3).abs() < 1e-12);
        assert_eq!(beta_for_count(&sc.tiers[0], region, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(beta_for_count(&sc.tiers[0], region, 1e6).unwrap(), 0.0);
    }

    #[test]
    fn default_grid_shape() {
        let users = fixtures::fig3().users;
        let g = default_z_grid(&users, f64::INFINITY, 25);
        assert_eq!(g.len(), 25);
        assert_eq!(*g.last().unwrap(), 0.0);
        assert!((g[0] - 1846.0).abs() < 1.0);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn empty_network_violates_the_floor() {
        let mut sc = fixtures::one_tier_table2(100);
        sc.tiers[0].lambda = 0.0;
        let grid = [1000.0, 0.0];
        let check = floor_constraint(&sc, 0.01, 0.95, &grid, &AnalyticOptions::fast()).unwrap();
        assert!(!check.feasible);
        assert_eq!(check.worst_value, 0.0);
        assert_eq!(check.worst_z, 1000.0);
    }

    #[test]
    fn dense_network_meets_a_low_floor() {
        let sc = fixtures::three_tier_table2();
        let grid = [800.0, 300.0, 0.0];
        let check = floor_constraint(&sc, db_to_linear(-20.0), 0.9, &grid, &AnalyticOptions::fast()).unwrap();
        assert!(check.feasible, "{check:?}");
        assert!(check.worst_value >= 0.9);
    }

    #[test]
    fn lambda_rule_holds_counts() {
        let mut p = OptProblem::new(fixtures::one_tier_table2(100), 0.1, 0.1, 1000.0);
        p.lambda_rule = LambdaRule::HoldCount;
        let before = count_constraint(&p.scenario, 1e9).unwrap().count;
        let after = count_constraint(&p.with_betas(&[1e-2]).unwrap(), 1e9).unwrap().count;
        assert!((before - after).abs() < 1e-9);
        p.lambda_rule = LambdaRule::Fixed;
        let fixed = p.with_betas(&[1e-2]).unwrap();
        assert_eq!(fixed.tiers[0].lambda, p.scenario.tiers[0].lambda);
        assert!(p.with_betas(&[1e-2, 1e-3]).is_err());
    }

    fn small_problem() -> OptProblem {
        let mut p = OptProblem::new(
            fixtures::one_tier_table2(100),
            db_to_linear(-15.0),
            db_to_linear(-20.0),
            30.0,
        );
        p.floor = None;
        p
    }

    #[test]
    fn grid_search_picks_the_map_maximum() {
        let p = small_problem().with_common_axis(vec![2e-3, 3.2e-3, 6e-3, 2e-2]);
        let r = grid_search(&p).unwrap();
        // the smallest beta puts more than 30 UAVs in the region
        assert_eq!(r.map[0].infeasible, Some(Infeasibility::CountCap));
        let max = r.map.iter().filter_map(|g| g.value).fold(f64::MIN, f64::max);
        assert_eq!(r.best_value, max);
        assert_eq!(r.evaluations, 3);
        let again = grid_search(&p).unwrap();
        assert_eq!(r, again);

        let single = small_problem().with_common_axis(vec![3.2e-3]);
        let r = grid_search(&single).unwrap();
        assert_eq!(r.best_betas, vec![3.2e-3]);
        let none = small_problem().with_common_axis(vec![1e-4]);
        assert_eq!(grid_search(&none), Err(Error::NoFeasiblePoint));
    }

    #[test]
    fn alternate_maximization_is_monotone() {
        let mut sc = fixtures::table3().scenario_named("two-tier");
        sc.tiers[1].beta = 1.0;
        let budget = count_constraint(&sc, 1e9).unwrap().count;
        let mut p = OptProblem::new(sc, db_to_linear(-15.0), db_to_linear(-20.0), budget + 1.0);
        p.floor = None;
        let settings = AltMaxSettings {
            step_fraction: 0.1,
            max_steps: 4,
            max_rounds: 1,
            ..AltMaxSettings::default()
        };
        let start = [4.2e-3, f64::INFINITY];
        let r = alternate_maximization(&p, &start, &settings).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] > w[0]));
        assert!(r.best_value >= r.history[0]);
        // every reported best point re-validates from scratch
        let sc = scenario_from_counts(
            &p,
            &r.best_betas
                .iter()
                .zip(&p.scenario.tiers)
                .map(|(&b, t)| {
                    if b.is_infinite() {
                        0.0
                    } else {
                        expected_uav_count(&TierConfig { beta: b, ..*t }, p.scenario.region_radius()).unwrap()
                    }
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(count_constraint(&sc, p.n_max).unwrap().feasible);
        let v = overall_coverage(&sc, p.gamma1, AnalyticMethod::Approx, &p.options).unwrap();
        assert!((v - r.best_value).abs() < 1e-9);
    }

    #[test]
    fn single_tier_has_nothing_to_move() {
        let p = small_problem();
        let r = alternate_maximization(&p, &[3.2e-3], &AltMaxSettings::default()).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best_betas, vec![3.2e-3]);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = small_problem();
        assert!(matches!(
            alternate_maximization(&p, &[1e-4], &AltMaxSettings::default()),
            Err(Error::InfeasibleStart(_))
        ));
    }

    #[test]
    fn problem_validation() {
        let mut p = small_problem();
        p.floor = Some(1.5);
        assert!(p.validate().is_err());
        let mut p = small_problem();
        p.floor = Some(0.9);
        p.z_grid = vec![100.0];
        assert!(p.validate().is_err());
        let mut p = small_problem();
        p.n_max = 0.0;
        assert!(p.validate().is_err());
    }
}
