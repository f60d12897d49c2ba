//! Piecewise Chebyshev interpolation of vector-valued functions with exact
//! running antiderivatives.
//!
//! The analytic engine evaluates the same class-mass densities millions of
//! times per coverage point. Fitting them once per user offset and reading
//! values and cumulative integrals off the interpolant is what keeps a local
//! coverage evaluation well under a second.

use std::f64::consts::PI;

/// Polynomial degree on every panel.
pub const DEGREE: usize = 24;

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone)]
struct Panel<const D: usize> {
    a: f64,
    b: f64,
    coeffs: [[f64; DEGREE + 1]; D],
    anti: [[f64; DEGREE + 2]; D],
    /// Integral from the left end of the whole domain to `a`.
    base: [f64; D],
}

/// A `D`-component function on `[lo, hi]`, approximated panel by panel.
///
/// Outside `[lo, hi]` the function reads as zero and the integral is
/// constant.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev<const D: usize> {
    panels: Vec<Panel<D>>,
    lo: f64,
    hi: f64,
}

fn lobatto_nodes() -> [f64; DEGREE + 1] {
    let mut x = [0.0; DEGREE + 1];
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = (PI * j as f64 / DEGREE as f64).cos();
    }
    x
}

/// Chebyshev coefficients from samples at the Lobatto nodes (x_0 = 1).
fn coefficients(samples: &[f64; DEGREE + 1]) -> [f64; DEGREE + 1] {
    let n = DEGREE;
    let mut c = [0.0; DEGREE + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut sum = 0.0;
        for (j, &fj) in samples.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            sum += w * fj * (PI * (j * k) as f64 / n as f64).cos();
        }
        let scale = if k == 0 || k == n { 1.0 } else { 2.0 };
        *ck = scale * sum / n as f64;
    }
    c
}

/// Coefficients of the antiderivative in `x`, vanishing at `x = -1`.
fn antiderivative(c: &[f64; DEGREE + 1]) -> [f64; DEGREE + 2] {
    let n = DEGREE;
    let at = |k: usize| if k <= n { c[k] } else { 0.0 };
    let mut a = [0.0; DEGREE + 2];
    a[1] = at(0) - at(2) / 2.0;
    for k in 2..=n + 1 {
        a[k] = (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
    }
    let mut at_minus_one = 0.0;
    for (k, ak) in a.iter().enumerate().skip(1) {
        at_minus_one += if k % 2 == 0 { *ak } else { -*ak };
    }
    a[0] = -at_minus_one;
    a
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

impl<const D: usize> Panel<D> {
    fn fit<F: Fn(f64) -> [f64; D]>(f: &F, a: f64, b: f64, nodes: &[f64; DEGREE + 1]) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut samples = [[0.0; DEGREE + 1]; D];
        for (j, &x) in nodes.iter().enumerate() {
            let v = f(mid + half * x);
            for d in 0..D {
                samples[d][j] = v[d];
            }
        }
        let mut coeffs = [[0.0; DEGREE + 1]; D];
        let mut anti = [[0.0; DEGREE + 2]; D];
        for d in 0..D {
            coeffs[d] = coefficients(&samples[d]);
            anti[d] = antiderivative(&coeffs[d]);
            for v in anti[d].iter_mut() {
                *v *= half;
            }
        }
        Panel {
            a,
            b,
            coeffs,
            anti,
            base: [0.0; D],
        }
    }

    /// Size of the trailing coefficients, a proxy for the interpolation error.
    fn tail(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.coeffs {
            let t = c[DEGREE].abs() + c[DEGREE - 1].abs() + c[DEGREE - 2].abs();
            worst = worst.max(t);
        }
        worst
    }

    fn local(&self, t: f64) -> f64 {
        ((2.0 * t - self.a - self.b) / (self.b - self.a)).clamp(-1.0, 1.0)
    }

    fn integral_to_end(&self) -> [f64; D] {
        let mut out = [0.0; D];
        for (d, o) in out.iter_mut().enumerate() {
            *o = clenshaw(&self.anti[d], 1.0);
        }
        out
    }
}

impl<const D: usize> PiecewiseChebyshev<D> {
    /// Fits `f` on `[lo, hi]` with mandatory breakpoints `breaks`, bisecting
    /// each panel until its trailing coefficients times its width fall below
    /// `tol_abs`.
    pub fn fit<F: Fn(f64) -> [f64; D]>(f: F, lo: f64, hi: f64, breaks: &[f64], tol_abs: f64) -> Self {
        assert!(hi > lo, "empty domain [{lo}, {hi}]");
        let nodes = lobatto_nodes();
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * hi.abs().max(1.0));

        let mut panels = Vec::new();
        for w in cuts.windows(2) {
            // depth-first so panels come out sorted
            let mut stack = vec![(w[1], 0u32)];
            let mut left = w[0];
            while let Some((right, depth)) = stack.pop() {
                let panel = Panel::fit(&f, left, right, &nodes);
                let mid = 0.5 * (left + right);
                let splittable = depth < MAX_DEPTH && mid > left && mid < right;
                if panel.tail() * (right - left) > tol_abs && splittable {
                    stack.push((right, depth + 1));
                    stack.push((mid, depth + 1));
                } else {
                    panels.push(panel);
                    left = right;
                }
            }
        }
        let mut running = [0.0; D];
        for p in panels.iter_mut() {
            p.base = running;
            let inc = p.integral_to_end();
            for d in 0..D {
                running[d] += inc[d];
            }
        }
        PiecewiseChebyshev { panels, lo, hi }
    }

    fn locate(&self, t: f64) -> &Panel<D> {
        let idx = self.panels.partition_point(|p| p.b < t);
        &self.panels[idx.min(self.panels.len() - 1)]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Panel edges, including both domain ends.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.panels.iter().map(|p| p.a).collect();
        e.push(self.hi);
        e
    }

    pub fn value(&self, t: f64, d: usize) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        let p = self.locate(t);
        clenshaw(&p.coeffs[d], p.local(t))
    }

    pub fn values(&self, t: f64) -> [f64; D] {
        let mut out = [0.0; D];
        if t < self.lo || t > self.hi {
            return out;
        }
        let p = self.locate(t);
        let x = p.local(t);
        for (d, o) in out.iter_mut().enumerate() {
            *o = clenshaw(&p.coeffs[d], x);
        }
        out
    }

    /// Integral of component `d` from the left end of the domain to `t`.
    pub fn integral(&self, t: f64, d: usize) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        let t = t.min(self.hi);
        let p = self.locate(t);
        p.base[d] + clenshaw(&p.anti[d], p.local(t))
    }

    pub fn total(&self, d: usize) -> f64 {
        self.integral(self.hi, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_1d, QuadSpec};

    #[test]
    fn smooth_function_single_panel() {
        let p = PiecewiseChebyshev::<1>::fit(|t| [t.sin()], 0.0, 1.0, &[], 1e-14);
        assert_eq!(p.panel_count(), 1);
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((p.value(t, 0) - t.sin()).abs() < 1e-14);
            assert!((p.integral(t, 0) - (1.0 - t.cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn kinked_function_with_and_without_breakpoint() {
        let f = |t: f64| [(t - 0.3).abs(), (-t).exp()];
        let with = PiecewiseChebyshev::<2>::fit(f, 0.0, 2.0, &[0.3], 1e-13);
        assert_eq!(with.panel_count(), 2);
        let without = PiecewiseChebyshev::<2>::fit(f, 0.0, 2.0, &[], 1e-10);
        assert!(without.panel_count() > 2);
        let exact_abs = |t: f64| {
            if t < 0.3 {
                0.3 * t - t * t / 2.0
            } else {
                0.045 + (t - 0.3).powi(2) / 2.0
            }
        };
        for i in 0..=40 {
            let t = i as f64 * 0.05;
            assert!((with.integral(t, 0) - exact_abs(t)).abs() < 1e-13);
            assert!((without.integral(t, 0) - exact_abs(t)).abs() < 1e-8);
            assert!((with.integral(t, 1) - (1.0 - (-t).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn sqrt_singularity_integral_oriented() {
        let f = |t: f64| [(1.0 - t).max(0.0).sqrt()];
        let p = PiecewiseChebyshev::<1>::fit(f, 0.0, 1.0, &[], 1e-10);
        assert!((p.total(0) - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn integral_matches_quadrature() {
        let f = |t: f64| [t * (-0.003 * t).exp() * (1.0 + (t / 300.0).sin().powi(2))];
        let p = PiecewiseChebyshev::<1>::fit(f, 0.0, 8000.0, &[1000.0], 1e-9);
        let spec = QuadSpec::default().with_rel_tol(1e-12);
        for &t in &[0.0f64, 10.0, 999.0, 1000.0, 4321.0, 8000.0, 9000.0] {
            let q = integrate_1d(|x| f(x)[0], 0.0, t.min(8000.0), &spec).value;
            assert!((p.integral(t, 0) - q).abs() < 1e-8 * q.max(1.0), "t={t}");
        }
        assert_eq!(p.value(8001.0, 0), 0.0);
        assert_eq!(p.integral(-1.0, 0), 0.0);
    }

    #[test]
    fn edges_are_sorted_and_cover_domain() {
        let p = PiecewiseChebyshev::<1>::fit(|t| [(t - 0.5).abs().sqrt()], 0.0, 1.0, &[0.5, 0.25], 1e-9);
        let e = p.edges();
        assert_eq!(e[0], 0.0);
        assert_eq!(*e.last().unwrap(), 1.0);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert!(e.contains(&0.5) && e.contains(&0.25));
    }
}
