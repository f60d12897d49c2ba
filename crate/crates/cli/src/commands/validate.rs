//! Analytic-versus-simulation oracle suite.
//!
//! For every requested offset the suite compares the tagged distance laws
//! (Kolmogorov-Smirnov gap), association probabilities, one interference
//! Laplace transform at three arguments and the local coverage itself.

use aerocov::analytic::{AnalyticMethod, AnalyticOptions, LocalModel, Threshold};
use aerocov::mc::{
    association_frequencies, empirical_laplace, empirical_tagged_distance, estimate_local_coverage, SimConfig,
};
use aerocov::model::{db_to_linear, LinkClass};
use serde_json::json;

use super::{analytic_method, analytic_options, analytic_provenance, mc_provenance, Outcome, Overrides};
use crate::config::{check_offsets, GapTolerances, LoadedConfig, MethodArg};
use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

pub const COLUMNS: [&str; 11] = [
    "quantity",
    "z_u",
    "tier",
    "class",
    "param",
    "analytic",
    "mc",
    "half_width_95",
    "gap",
    "tolerance",
    "pass",
];

/// 95% critical value of the one-sample Kolmogorov-Smirnov statistic,
/// times `1/sqrt(n)`.
const KS_95: f64 = 1.358;

/// One comparison of the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub quantity: &'static str,
    pub z_u: f64,
    pub tier: Option<usize>,
    pub class: Option<LinkClass>,
    pub param: Option<f64>,
    pub analytic: f64,
    pub mc: f64,
    pub half_width: f64,
    pub gap: f64,
    pub tolerance: f64,
}

impl Check {
    /// The gap is judged against the tolerance widened by the sampling
    /// half-width.
    pub fn pass(&self) -> bool {
        self.gap <= self.tolerance + self.half_width
    }

    fn row(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        vec![
            self.quantity.into(),
            num(self.z_u),
            opt(self.tier.map(|k| (k + 1).to_string())),
            opt(self.class.map(|c| c.to_string())),
            opt(self.param.map(num)),
            num(self.analytic),
            num(self.mc),
            num(self.half_width),
            num(self.gap),
            num(self.tolerance),
            self.pass().to_string(),
        ]
    }
}

/// Largest vertical distance between the analytic (defective) CDF and the
/// empirical CDF of `samples`, where `+∞` marks an absent UAV. Returns the
/// gap with the distance, analytic value and empirical value where it
/// occurs.
pub fn ks_gap<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64, f64, f64) {
    let n = samples.len() as f64;
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|r| r.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut best = (0.0, f64::NAN, f64::NAN, f64::NAN);
    for (i, &r) in sorted.iter().enumerate() {
        let f = cdf(r);
        let (below, above) = (i as f64 / n, (i + 1) as f64 / n);
        for emp in [below, above] {
            let d = (f - emp).abs();
            if d > best.0 {
                best = (d, r, f, emp);
            }
        }
    }
    best
}

fn bisect_log<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m.exp()) > target {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Serving tier and class with the largest association probability, a
/// typical serving distance (the conditional median) and Laplace arguments
/// around the point where the transform is halfway to its floor.
pub fn laplace_probe(model: &LocalModel) -> aerocov::Result<(usize, LinkClass, f64, [f64; 3])> {
    let sc = model.scenario();
    let mut pick = (0, LinkClass::Los, -1.0);
    for j in 0..sc.tiers.len() {
        for class in LinkClass::ALL {
            let p = model.association_total(j, class)?;
            if p > pick.2 {
                pick = (j, class, p);
            }
        }
    }
    let (j, class, _) = pick;
    let h = sc.tiers[j].altitude_m;
    let full = model.tagged_cdf(j, class, f64::MAX)?;
    let cdf = |r: f64| model.tagged_cdf(j, class, r).unwrap_or(0.0);
    let r = bisect_log(|r| full - cdf(r), 0.5 * full, h * (1.0 + 1e-9), h + 1e6);
    let lap = |s: f64| model.interference_laplace(j, class, s, r).unwrap_or(f64::NAN);
    let floor = lap(1e30);
    let s_mid = bisect_log(lap, 0.5 * (1.0 + floor), 1e-30, 1e30);
    Ok((j, class, r, [0.25 * s_mid, s_mid, 4.0 * s_mid]))
}

/// Runs the suite at one offset.
pub fn checks_at(
    model: &LocalModel,
    sim: &SimConfig,
    threshold: &Threshold,
    method: AnalyticMethod,
    tol: &GapTolerances,
) -> aerocov::Result<Vec<Check>> {
    let sc = model.scenario();
    let z = model.z_u();
    let mut out = Vec::new();
    let base = |quantity, tier, class, param, analytic: f64, mc: f64, half_width, tolerance| Check {
        quantity,
        z_u: z,
        tier,
        class,
        param,
        analytic,
        mc,
        half_width,
        gap: (analytic - mc).abs(),
        tolerance,
    };

    for k in 0..sc.tiers.len() {
        for class in LinkClass::ALL {
            let samples = empirical_tagged_distance(sc, sim, k, class, z)?;
            let (gap, r, f, emp) = ks_gap(&samples, |r| model.tagged_cdf(k, class, r).unwrap_or(f64::NAN));
            let mut c = base(
                "tagged_cdf_ks",
                Some(k),
                Some(class),
                Some(r),
                f,
                emp,
                KS_95 / (sim.trials as f64).sqrt(),
                tol.ks,
            );
            c.gap = gap;
            if gap == 0.0 {
                c.param = None;
                c.analytic = 0.0;
                c.mc = 0.0;
            }
            out.push(c);
        }
    }

    let freq = association_frequencies(sc, sim, z)?;
    let n = sim.trials as f64;
    for (k, served) in freq.served.iter().enumerate() {
        for class in LinkClass::ALL {
            let p = model.association_total(k, class)?;
            let m = served[class.index()];
            let hw = 1.96 * (m * (1.0 - m) / n).sqrt();
            out.push(base(
                "association",
                Some(k),
                Some(class),
                None,
                p,
                m,
                hw,
                tol.association,
            ));
        }
    }

    let (j, class, r, s_values) = laplace_probe(model)?;
    let empirical = empirical_laplace(sc, sim, j, class, r, z, &s_values)?;
    for (&s, est) in s_values.iter().zip(&empirical) {
        let a = model.interference_laplace(j, class, s, r)?;
        out.push(base(
            "laplace",
            Some(j),
            Some(class),
            Some(s),
            a,
            est.mean,
            est.half_width_95,
            tol.laplace,
        ));
    }

    let a = model.coverage(threshold, method)?;
    let est = estimate_local_coverage(sc, sim, z, threshold.clone())?;
    out.push(base(
        "coverage",
        None,
        None,
        None,
        a,
        est.mean,
        est.half_width_95,
        tol.coverage,
    ));
    Ok(out)
}

pub fn run(cfg: &LoadedConfig, ov: &Overrides) -> CliResult<Outcome> {
    let block = cfg.require(&cfg.config.validate, "validate")?;
    if block.z.is_empty() {
        return Err(CliError::Usage("validate: the list of user offsets is empty".into()));
    }
    check_offsets("validate.z", &block.z)?;
    let method = ov
        .method
        .or(Some(MethodArg::Approx))
        .and_then(analytic_method)
        .ok_or_else(|| {
            CliError::Usage("validate compares against simulation; choose --method exact or approx".into())
        })?;
    let scenario = cfg.scenario()?;
    let opts = analytic_options(cfg, AnalyticOptions::default(), ov)?;
    let sim = SimConfig::new(ov.seed.unwrap_or(block.seed), block.trials).with_sampling(block.sampling);
    sim.validate().map_err(|e| CliError::Usage(format!("validate: {e}")))?;
    let threshold = Threshold::Common(db_to_linear(block.gamma_db));

    let mut out = Outcome::new(Table::new(COLUMNS));
    let mut failed = 0;
    for &z in &block.z {
        let model = LocalModel::new(&scenario, z, &opts)?;
        for c in checks_at(&model, &sim, &threshold, method, &block.tolerances)? {
            if !c.pass() {
                failed += 1;
            }
            out.table.push(c.row());
        }
    }
    let total = out.table.rows.len();
    out.seeds.push(sim.seed);
    out.provenance.push(analytic_provenance(method, &opts));
    out.provenance.push(mc_provenance(&sim));
    out.summary = json!({ "checks": total, "failed": failed });
    if failed > 0 {
        out.failure = Some(CliError::Validation { failed, total });
    }
    Ok(out)
}
