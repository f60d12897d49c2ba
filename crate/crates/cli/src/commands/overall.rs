use aerocov::analytic::{overall_coverage, AnalyticOptions, Threshold};
use aerocov::mc::estimate_overall_coverage;
use aerocov::model::db_to_linear;
use serde_json::json;

use super::{
    analytic_method, analytic_options, analytic_provenance, flag_quadrature, mc_provenance, sim_config, Outcome,
    Overrides,
};
use crate::config::{LoadedConfig, MethodArg};
use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

pub const COLUMNS: [&str; 5] = ["gamma_db", "coverage", "method", "half_width_95", "status"];

/// Coverage averaged over the user distribution, as a single row.
pub fn run(cfg: &LoadedConfig, ov: &Overrides) -> CliResult<Outcome> {
    let block = cfg.require(&cfg.config.overall, "overall")?;
    let scenario = cfg.scenario()?;
    let threshold = Threshold::Common(db_to_linear(block.gamma_db));
    let method = ov.method.or(block.method).unwrap_or(MethodArg::Approx);
    let mut out = Outcome::new(Table::new(COLUMNS));
    let gamma = num(block.gamma_db);

    match analytic_method(method) {
        Some(am) => {
            let opts = analytic_options(cfg, AnalyticOptions::default(), ov)?;
            let row = match flag_quadrature(overall_coverage(&scenario, threshold, am, &opts))? {
                Ok(v) => vec![gamma, num(v), method.to_string(), String::new(), "ok".into()],
                Err(msg) => {
                    out.flagged += 1;
                    vec![gamma, String::new(), method.to_string(), String::new(), msg]
                }
            };
            out.summary = json!({ "coverage": row[1] });
            out.table.push(row);
            out.provenance.push(analytic_provenance(am, &opts));
        }
        None => {
            let mc = block
                .mc
                .as_ref()
                .ok_or_else(|| CliError::Usage("overall: method mc needs an `mc` block".into()))?;
            let sim = sim_config(mc, ov);
            let est = estimate_overall_coverage(&scenario, &sim, threshold)?;
            out.table.push(vec![
                gamma,
                num(est.mean),
                "mc".into(),
                num(est.half_width_95),
                "ok".into(),
            ]);
            out.summary = json!({ "coverage": est.mean, "half_width_95": est.half_width_95 });
            out.seeds.push(sim.seed);
            out.provenance.push(mc_provenance(&sim));
        }
    }
    Ok(out)
}
