use aerocov::fixtures;
use aerocov::model::expected_uav_count;
use aerocov::optimize::{
    alternate_maximization, count_constraint, grid_search, AltMaxSettings, Infeasibility, OptProblem,
};

fn problem() -> OptProblem {
    let t3 = fixtures::table3();
    let sc = t3.scenario_named("two-tier");
    let n = count_constraint(&sc, f64::INFINITY).unwrap().count;
    let mut p = OptProblem::new(sc, t3.gamma(), t3.gamma(), n * 1.001);
    p.floor = None;
    p
}

#[test]
fn grid_best_is_feasible_and_maximal() {
    let p = problem().with_common_axis(vec![1e-3, 3e-3, 9e-3]);
    let res = grid_search(&p).unwrap();
    assert_eq!(res.map.len(), 9);
    let best = res.map.iter().filter_map(|g| g.value).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, res.best_value);
    for g in &res.map {
        match g.infeasible {
            Some(Infeasibility::CountCap) => assert!(g.count > p.n_max),
            _ => assert!(g.count <= p.n_max * (1.0 + 1e-9)),
        }
    }
}

#[test]
fn alternate_maximization_holds_the_budget() {
    let p = problem();
    let region = p.scenario.region_radius();
    let start: Vec<f64> = p.scenario.tiers.iter().map(|t| t.beta).collect();
    let settings = AltMaxSettings {
        max_steps: 6,
        max_rounds: 1,
        ..Default::default()
    };
    let res = alternate_maximization(&p, &start, &settings).unwrap();
    let used: f64 = p
        .scenario
        .tiers
        .iter()
        .zip(&res.best_betas)
        .map(|(t, &beta)| {
            if beta.is_finite() {
                expected_uav_count(&aerocov::model::TierConfig { beta, ..*t }, region).unwrap()
            } else {
                0.0
            }
        })
        .sum();
    assert!(used <= p.n_max * (1.0 + 1e-6), "{used} > {}", p.n_max);
    assert!(res.history.windows(2).all(|w| w[1] >= w[0]));
}
