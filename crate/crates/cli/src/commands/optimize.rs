use aerocov::analytic::AnalyticOptions;
use aerocov::model::db_to_linear;
use aerocov::optimize::{alternate_maximization, grid_search, GridPoint, Infeasibility, OptProblem, OptResult};
use serde_json::json;

use super::{analytic_options, Outcome, Overrides};
use crate::config::{check_offsets, LoadedConfig, MethodArg};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, Provenance, Table};

fn columns(k: usize) -> Vec<String> {
    let mut c = vec!["stage".to_string(), "index".into()];
    c.extend((1..=k).map(|i| format!("beta_{i}")));
    c.extend((1..=k).map(|i| format!("lambda_{i}")));
    c.extend(["count", "value", "status", "worst_z", "worst_value", "best"].map(String::from));
    c
}

fn status(p: &GridPoint) -> &'static str {
    match p.infeasible {
        None => "feasible",
        Some(Infeasibility::CountCap) => "count-cap",
        Some(Infeasibility::FloorViolation) => "floor",
    }
}

fn push_points(table: &mut Table, stage: &str, result: &OptResult) {
    let mut best_marked = false;
    for (i, p) in result.map.iter().enumerate() {
        let is_best = !best_marked && p.value == Some(result.best_value) && p.betas == result.best_betas;
        best_marked |= is_best;
        let mut row = vec![stage.to_string(), i.to_string()];
        row.extend(p.betas.iter().map(|&b| num(b)));
        row.extend(p.lambdas.iter().map(|&l| num(l)));
        row.push(num(p.count));
        row.push(opt_num(p.value));
        row.push(status(p).into());
        row.push(opt_num(p.floor.map(|f| f.worst_z)));
        row.push(opt_num(p.floor.map(|f| f.worst_value)));
        row.push(is_best.to_string());
        table.push(row);
    }
}

/// Grid search over per-tier β, optionally refined by alternate
/// maximization.
pub fn run(cfg: &LoadedConfig, ov: &Overrides) -> CliResult<Outcome> {
    let block = cfg.require(&cfg.config.optimize, "optimize")?;
    if matches!(ov.method, Some(m) if m != MethodArg::Approx) {
        return Err(CliError::Usage(
            "optimize evaluates the approximate analytic path only".into(),
        ));
    }
    let scenario = cfg.scenario()?;
    let k = scenario.tiers.len();
    let opts = analytic_options(cfg, AnalyticOptions::fast(), ov)?;
    let mut problem = OptProblem::new(
        scenario,
        db_to_linear(block.gamma1_db),
        db_to_linear(block.gamma2_db),
        block.n_max,
    );
    problem.floor = block.floor;
    problem.lambda_rule = block.lambda_rule;
    problem.options = opts;
    if let Some(z) = &block.z_grid {
        check_offsets("optimize.z_grid", z)?;
        problem.z_grid = z.clone();
    }
    problem.beta_axes = match (&block.grid, &block.axes) {
        (Some(_), Some(_)) => return Err(CliError::Usage("optimize: give `grid` or `axes`, not both".into())),
        (Some(g), None) => vec![g.values(); k],
        (None, Some(a)) if a.len() != k => {
            return Err(CliError::Usage(format!("optimize: {} axes for {k} tiers", a.len())));
        }
        (None, Some(a)) => a.clone(),
        (None, None) => Vec::new(),
    };
    if problem.beta_axes.is_empty() && block.alternate.as_ref().and_then(|a| a.start.as_ref()).is_none() {
        return Err(CliError::Usage(
            "optimize: needs a β grid (`grid` or `axes`) or an `alternate` block with a `start`".into(),
        ));
    }
    problem.validate().map_err(|e| CliError::Config {
        path: cfg.path.clone(),
        message: format!("optimize: {e}"),
    })?;

    let mut out = Outcome::new(Table::new(columns(k)));
    let mut summary = serde_json::Map::new();
    let mut best: Option<(Vec<f64>, f64)> = None;

    if !problem.beta_axes.is_empty() {
        let grid = grid_search(&problem).map_err(|e| match e {
            aerocov::Error::NoFeasiblePoint => {
                CliError::Infeasible("every grid point violates the UAV count cap or the local coverage floor".into())
            }
            e => e.into(),
        })?;
        push_points(&mut out.table, "grid", &grid);
        let count = |s: &str| grid.map.iter().filter(|p| status(p) == s).count();
        summary.insert(
            "grid".into(),
            json!({
                "points": grid.map.len(),
                "feasible": count("feasible"),
                "count_cap": count("count-cap"),
                "floor": count("floor"),
                "best_betas": grid.best_betas,
                "best_value": grid.best_value,
            }),
        );
        best = Some((grid.best_betas.clone(), grid.best_value));
    }

    if let Some(alt) = &block.alternate {
        let start: Vec<f64> = match (&alt.start, &best) {
            (Some(s), _) => s.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect(),
            (None, Some((b, _))) => b.clone(),
            (None, None) => unreachable!("checked above"),
        };
        let settings = alt.settings.unwrap_or_default();
        let refined = alternate_maximization(&problem, &start, &settings).map_err(|e| match e {
            aerocov::Error::InfeasibleStart(m) => CliError::Infeasible(format!("alternate maximization start: {m}")),
            e => e.into(),
        })?;
        push_points(&mut out.table, "alternate", &refined);
        summary.insert(
            "alternate".into(),
            json!({
                "evaluations": refined.evaluations,
                "history": refined.history,
                "best_betas": refined.best_betas,
                "best_value": refined.best_value,
            }),
        );
        if best.as_ref().map_or(true, |(_, v)| refined.best_value > *v) {
            best = Some((refined.best_betas.clone(), refined.best_value));
        }
    }

    if let Some((betas, value)) = best {
        summary.insert("best".into(), json!({ "betas": betas, "value": value }));
    }
    out.summary = serde_json::Value::Object(summary);
    out.provenance.push(Provenance {
        method: "approx".into(),
        analytic: Some(opts),
        ..Default::default()
    });
    Ok(out)
}
