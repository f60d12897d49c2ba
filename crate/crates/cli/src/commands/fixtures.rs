use aerocov::analytic::{overall_coverage, AnalyticOptions, Threshold};
use aerocov::fixtures::{self, TableFixture};
use rayon::prelude::*;
use serde_json::json;

use super::{analytic_method, analytic_provenance, flag_quadrature, Outcome, Overrides};
use crate::config::MethodArg;
use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

pub const LIST_COLUMNS: [&str; 3] = ["name", "kind", "rows"];
pub const REGRESS_COLUMNS: [&str; 6] = ["row", "expected", "coverage", "gap", "method", "status"];

/// What the `fixtures` subcommand produces.
#[derive(Debug)]
pub enum FixtureOutput {
    /// Raw JSON of one fixture.
    Json(&'static str),
    Table(Outcome),
}

fn table_fixture(name: &str) -> Option<TableFixture> {
    match name {
        "table2" => Some(fixtures::table2()),
        "table3" => Some(fixtures::table3()),
        _ => None,
    }
}

pub fn list() -> Outcome {
    let mut out = Outcome::new(Table::new(LIST_COLUMNS));
    for name in fixtures::NAMES {
        let (kind, rows) = match table_fixture(name) {
            Some(t) => (
                "table",
                t.rows.iter().map(|r| r.name.clone()).collect::<Vec<_>>().join(";"),
            ),
            None => ("sweep", "baseline".to_string()),
        };
        out.table.push(vec![name.into(), kind.into(), rows]);
    }
    out
}

pub fn show(name: &str) -> CliResult<&'static str> {
    fixtures::by_name(name)
        .ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}` ({})", fixtures::NAMES.join(", "))))
}

/// Overall coverage of every row of a table fixture next to its published
/// value.
pub fn regress(name: &str, ov: &Overrides) -> CliResult<Outcome> {
    let table = table_fixture(name)
        .ok_or_else(|| CliError::Usage(format!("`{name}` has no rows to regress (table2, table3)")))?;
    let method = ov.method.unwrap_or(MethodArg::Approx);
    let am = analytic_method(method)
        .ok_or_else(|| CliError::Usage("fixture regression uses the analytic engine; choose exact or approx".into()))?;
    let mut opts = AnalyticOptions::default();
    if let Some(t) = ov.tolerance {
        opts.quad = opts.quad.with_rel_tol(t);
    }
    opts.validate()?;
    let threshold = Threshold::Common(table.gamma());
    let values = table
        .rows
        .par_iter()
        .map(|row| flag_quadrature(overall_coverage(&table.scenario(row), threshold.clone(), am, &opts)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Outcome::new(Table::new(REGRESS_COLUMNS));
    let mut summary = serde_json::Map::new();
    for (row, v) in table.rows.iter().zip(values) {
        let (value, gap, status) = match v {
            Ok(v) => {
                summary.insert(row.name.clone(), json!(v));
                (num(v), num((v - row.expected).abs()), "ok".to_string())
            }
            Err(msg) => {
                out.flagged += 1;
                (String::new(), String::new(), msg)
            }
        };
        out.table.push(vec![
            row.name.clone(),
            num(row.expected),
            value,
            gap,
            method.to_string(),
            status,
        ]);
    }
    out.summary = serde_json::Value::Object(summary);
    out.provenance.push(analytic_provenance(am, &opts));
    Ok(out)
}

pub fn run(name: Option<&str>, regress_rows: bool, ov: &Overrides) -> CliResult<FixtureOutput> {
    match (name, regress_rows) {
        (None, false) => Ok(FixtureOutput::Table(list())),
        (None, true) => Err(CliError::Usage("--regress needs a fixture name".into())),
        (Some(n), false) => show(n).map(FixtureOutput::Json),
        (Some(n), true) => regress(n, ov).map(FixtureOutput::Table),
    }
}
