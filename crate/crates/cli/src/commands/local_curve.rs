use aerocov::analytic::{AnalyticOptions, LocalModel, Threshold};
use aerocov::mc::estimate_local_coverage;
use aerocov::model::db_to_linear;
use rayon::prelude::*;
use serde_json::json;

use super::{
    analytic_method, analytic_options, analytic_provenance, flag_quadrature, mc_provenance, sim_config, Outcome,
    Overrides,
};
use crate::config::{LoadedConfig, MethodArg};
use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

pub const COLUMNS: [&str; 6] = ["z_u", "gamma_db", "coverage", "method", "half_width_95", "status"];

/// Local coverage against user offset, analytic and optionally simulated.
pub fn run(cfg: &LoadedConfig, ov: &Overrides) -> CliResult<Outcome> {
    let block = cfg.require(&cfg.config.local_curve, "local_curve")?;
    let z = block.offsets()?;
    let scenario = cfg.scenario()?;
    let threshold = Threshold::Common(db_to_linear(block.gamma_db));
    let method = ov.method.or(block.method).unwrap_or(MethodArg::Approx);
    let mut table = Table::new(COLUMNS);
    let mut out = Outcome::new(Table::new(COLUMNS));

    if let Some(am) = analytic_method(method) {
        let opts = analytic_options(cfg, AnalyticOptions::default(), ov)?;
        let values = z
            .par_iter()
            .map(|&z| flag_quadrature(LocalModel::new(&scenario, z, &opts).and_then(|m| m.coverage(&threshold, am))))
            .collect::<CliResult<Vec<_>>>()?;
        for (&z, v) in z.iter().zip(values) {
            let (value, status) = match v {
                Ok(v) => (num(v), "ok".to_string()),
                Err(msg) => {
                    out.flagged += 1;
                    (String::new(), msg)
                }
            };
            table.push(vec![
                num(z),
                num(block.gamma_db),
                value,
                method.to_string(),
                String::new(),
                status,
            ]);
        }
        out.provenance.push(analytic_provenance(am, &opts));
    }

    let mc = match (method, &block.mc_overlay) {
        (MethodArg::Mc, None) => {
            return Err(CliError::Usage(
                "local_curve: method mc needs an `mc_overlay` block".into(),
            ));
        }
        (_, Some(b)) => Some(sim_config(b, ov)),
        (_, None) => None,
    };
    if let Some(sim) = mc {
        for &z in &z {
            let est = estimate_local_coverage(&scenario, &sim, z, threshold.clone())?;
            table.push(vec![
                num(z),
                num(block.gamma_db),
                num(est.mean),
                "mc".into(),
                num(est.half_width_95),
                "ok".into(),
            ]);
        }
        out.seeds.push(sim.seed);
        out.provenance.push(mc_provenance(&sim));
    }

    out.summary = json!({ "points": z.len(), "gamma_db": block.gamma_db, "method": method.to_string() });
    out.table = table;
    Ok(out)
}
