//! Adaptive Gauss–Kronrod integration and Richardson-extrapolated
//! numerical differentiation.
//!
//! Integrands may be evaluated from several threads at once by callers that
//! parallelize over independent integrals, so they must be reentrant (`Fn`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances and limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Relative size of the neglected tail of a semi-infinite integral.
    pub tail_epsilon: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_epsilon: 1e-7,
        }
    }
}

impl QuadSpec {
    /// Tolerances used for full coverage-curve runs.
    pub fn coarse() -> Self {
        QuadSpec {
            rel_tol: 1e-4,
            ..QuadSpec::default()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadSpec { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadSpec { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", format!("must be positive, got {}", self.abs_tol)));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be positive"));
        }
        if !(self.tail_epsilon > 0.0 && self.tail_epsilon < 1.0) {
            return Err(invalid(
                "tail_epsilon",
                format!("must lie in (0, 1), got {}", self.tail_epsilon),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    const ZERO: QuadResult = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };

    fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    /// The value, or an error if the integration did not converge.
    pub fn into_value(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature(format!(
                "value {:e} with error estimate {:e} after {} evaluations",
                self.value, self.error_estimate, self.evaluations
            )))
        }
    }
}

// 21-point Kronrod nodes (positive half) and weights, with the embedded
// 10-point Gauss weights on the odd-indexed nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut lo = [0.0; 10];
    let mut hi = [0.0; 10];
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    for i in 0..10 {
        let dx = half * XGK[i];
        lo[i] = f(center - dx);
        hi[i] = f(center + dx);
        kronrod += WGK[i] * (lo[i] + hi[i]);
        abs_sum += WGK[i] * (lo[i].abs() + hi[i].abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo[i] + hi[i]);
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK-style rescaling of the raw Gauss/Kronrod difference.
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for i in 0..10 {
        asc += WGK[i] * ((lo[i] - mean).abs() + (hi[i] - mean).abs());
    }
    asc *= half.abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let resabs = abs_sum * half.abs();
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

const EVALS_PER_SEGMENT: usize = 21;

/// Adaptive integral of `f` over `[a, b]`.
///
/// The rule never evaluates the endpoints, so integrable endpoint
/// singularities are handled by repeated bisection towards them.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> QuadResult {
    if a == b {
        return QuadResult::ZERO;
    }
    if a > b {
        let r = integrate_1d(f, b, a, spec);
        return QuadResult { value: -r.value, ..r };
    }
    let first = gk21(&f, a, b);
    let mut evaluations = EVALS_PER_SEGMENT;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let tol = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());
    while total_err > tol(total) && heap.len() < spec.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine precision
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        evaluations += 2 * EVALS_PER_SEGMENT;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    QuadResult {
        value,
        error_estimate: error,
        evaluations,
        converged: error <= tol(value) && value.is_finite(),
    }
}

/// Integral of `f` over `[a, ∞)` by summing panels of doubling width until
/// a panel contributes less than `tail_epsilon` of the running total.
///
/// `scale` is the width of the first panel and should be the decay length
/// of the integrand.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, spec: &QuadSpec) -> QuadResult {
    let mut width = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let mut lo = a;
    let mut acc = QuadResult::ZERO;
    let mut quiet_panels = 0;
    for _ in 0..200 {
        let hi = lo + width;
        let panel = integrate_1d(&f, lo, hi, spec);
        acc = acc.add(panel);
        if panel.value.abs() <= spec.tail_epsilon * acc.value.abs() {
            quiet_panels += 1;
            // two quiet panels in a row guard against an integrand that
            // is still rising from near zero
            if quiet_panels >= 2 {
                return acc;
            }
        } else {
            quiet_panels = 0;
        }
        if acc.value == 0.0 && hi - a > 1e6 * width.max(1.0) {
            return acc;
        }
        lo = hi;
        width *= 2.0;
    }
    QuadResult {
        converged: false,
        ..acc
    }
}

/// Iterated integral of `f(l, θ)` with the inner variable over
/// `theta_bounds(l)` and the outer over `l_bounds`.
///
/// The inner integrals use a tenth of the outer tolerances.
pub fn integrate_2d_nested<F, B>(f: F, l_bounds: (f64, f64), theta_bounds: B, spec: &QuadSpec) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> Option<(f64, f64)>,
{
    let inner_spec = QuadSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        ..*spec
    };
    let inner_ok = std::cell::Cell::new(true);
    let inner_evals = std::cell::Cell::new(0usize);
    let outer = integrate_1d(
        |l| match theta_bounds(l) {
            Some((lo, hi)) if hi > lo => {
                let r = integrate_1d(|t| f(l, t), lo, hi, &inner_spec);
                if !r.converged {
                    inner_ok.set(false);
                }
                inner_evals.set(inner_evals.get() + r.evaluations);
                r.value
            }
            _ => 0.0,
        },
        l_bounds.0,
        l_bounds.1,
        spec,
    );
    QuadResult {
        evaluations: outer.evaluations + inner_evals.get(),
        converged: outer.converged && inner_ok.get(),
        ..outer
    }
}

/// Central-difference weights for derivatives of order 1..=4 on the
/// stencil `-2h..=2h`.
fn central_difference<F: Fn(f64) -> f64>(f: &F, s0: f64, n: u32, h: f64) -> f64 {
    match n {
        1 => (f(s0 + h) - f(s0 - h)) / (2.0 * h),
        2 => (f(s0 + h) - 2.0 * f(s0) + f(s0 - h)) / (h * h),
        3 => (f(s0 + 2.0 * h) - 2.0 * f(s0 + h) + 2.0 * f(s0 - h) - f(s0 - 2.0 * h)) / (2.0 * h * h * h),
        4 => (f(s0 + 2.0 * h) - 4.0 * f(s0 + h) + 6.0 * f(s0) - 4.0 * f(s0 - h) + f(s0 - 2.0 * h)) / (h * h * h * h),
        _ => unreachable!("order checked by caller"),
    }
}

/// Default largest step for an order-`n` [`nth_derivative`] at `s0`.
///
/// First derivatives use a relative step of `1e-3`; higher orders widen it
/// to `1e-3^(2/(n+1))` so that round-off, which grows like `h^-n`, stays
/// below the extrapolated truncation error.
pub fn default_step(s0: f64, n: u32) -> f64 {
    s0.abs().max(1.0) * 1e-3f64.powf(2.0 / (f64::from(n.max(1)) + 1.0))
}

/// `n`-th derivative of `f` at `s0` by central differences at steps
/// `h0, h0/2, h0/4, h0/8` combined by Richardson extrapolation.
///
/// The truncation error of every stencil is even in `h`, so each
/// extrapolation level removes two orders.
pub fn nth_derivative<F: Fn(f64) -> f64>(f: F, s0: f64, n: u32, h0: f64) -> Result<f64> {
    if n == 0 {
        return Ok(f(s0));
    }
    if n > 4 {
        return Err(Error::DerivativeOrder(n));
    }
    if !(h0 > 0.0) {
        return Err(invalid("h0", format!("step must be positive, got {h0}")));
    }
    const LEVELS: usize = 4;
    let mut table = [[0.0f64; LEVELS]; LEVELS];
    let mut h = h0;
    for i in 0..LEVELS {
        table[i][0] = central_difference(&f, s0, n, h);
        let mut factor = 4.0;
        for j in 1..=i {
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
        h *= 0.5;
    }
    // Pick the diagonal entry whose change from its predecessor is smallest;
    // deeper levels can lose to round-off for noisy integrands.
    let mut best = table[1][1];
    let mut best_change = (table[1][1] - table[0][0]).abs();
    for i in 2..LEVELS {
        let change = (table[i][i] - table[i - 1][i - 1]).abs();
        if change < best_change {
            best_change = change;
            best = table[i][i];
        }
    }
    Ok(best)
}
