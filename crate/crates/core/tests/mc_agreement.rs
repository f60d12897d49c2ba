use aerocov::analytic::{local_coverage, overall_coverage, AnalyticMethod, AnalyticOptions};
use aerocov::fixtures;
use aerocov::mc::{estimate_local_coverage, estimate_overall_coverage, SimConfig};

fn within(analytic: f64, mean: f64, half_width: f64) -> bool {
    // two half-widths plus slack for the analytic tolerance
    (analytic - mean).abs() <= 2.0 * half_width + 2e-3
}

#[test]
fn local_coverage_agrees_with_simulation() {
    let t2 = fixtures::table2();
    let sc = t2.scenario_named("three-tier");
    let sim = SimConfig::new(11, 6000);
    for z in [0.0, 800.0, 1800.0] {
        let a = local_coverage(&sc, z, t2.gamma(), AnalyticMethod::Approx, &AnalyticOptions::default()).unwrap();
        let e = estimate_local_coverage(&sc, &sim, z, t2.gamma()).unwrap();
        assert!(
            within(a, e.mean, e.half_width_95),
            "z={z}: analytic {a}, mc {} ± {}",
            e.mean,
            e.half_width_95
        );
    }
}

#[test]
fn overall_coverage_agrees_with_simulation() {
    let t2 = fixtures::table2();
    let sc = t2.scenario_named("one-tier-100m");
    let a = overall_coverage(&sc, t2.gamma(), AnalyticMethod::Approx, &AnalyticOptions::fast()).unwrap();
    let e = estimate_overall_coverage(&sc, &SimConfig::new(3, 6000), t2.gamma()).unwrap();
    assert!(
        within(a, e.mean, e.half_width_95),
        "analytic {a}, mc {} ± {}",
        e.mean,
        e.half_width_95
    );
}
