//! Fixed-order Gauss–Legendre rules and an adaptive panel integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default number of Gauss–Legendre nodes per panel.
pub const DEFAULT_ORDER: usize = 16;

const MAX_DEPTH: u32 = 30;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The shared 16-point rule.
    pub fn default_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b], failing on the first non-finite sample.
    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let x = mid + half * t;
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { x, value: v });
            }
            sum += w * v;
        }
        Ok(half * sum)
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (z * pn - pn1) / (z * z - 1.0);
    (pn, d)
}

/// Integrates over one panel, halving until the one-panel and two-half
/// estimates agree to `tol` (absolute), or to [`RELATIVE_FLOOR`] of the
/// panel value when that is larger.
/// Relative agreement below which halving stops regardless of `tol`.
pub const RELATIVE_FLOOR: f64 = 1e-14;

pub fn adaptive_panel<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = GaussLegendre::default_rule();
    let whole = rule.integrate(f, a, b)?;
    refine(rule, f, a, b, whole, tol, 0)
}

fn refine<F: Fn(f64) -> f64 + ?Sized>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m)?;
    let right = rule.integrate(f, m, b)?;
    let halves = left + right;
    if (halves - whole).abs() <= tol.max(RELATIVE_FLOOR * halves.abs()) || depth >= MAX_DEPTH || m <= a || m >= b {
        return Ok(halves);
    }
    Ok(refine(rule, f, a, m, left, 0.5 * tol, depth + 1)?
        + refine(rule, f, m, b, right, 0.5 * tol, depth + 1)?)
}

/// Integrates over [a, b] by splitting into panels of at most `panel_width`
/// and applying [`adaptive_panel`] to each.
pub fn integrate_panels<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    panel_width: f64,
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_panels(f, b, a, panel_width, tol).map(|v| -v);
    }
    let panels = ((b - a) / panel_width).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        sum += adaptive_panel(f, lo, hi, tol)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let rule = GaussLegendre::new(16);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_degree_31() {
        let rule = GaussLegendre::new(16);
        let v = rule.integrate(&|x: f64| x.powi(30), -1.0, 1.0).unwrap();
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn small_orders_match_tables() {
        let r = GaussLegendre::new(2);
        assert!((r.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!(r.nodes()[1].abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| (-1000.0 * x * x).exp();
        let v = integrate_panels(&f, -1.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((v - (PI / 1000.0).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn reports_offending_abscissa() {
        let f = |x: f64| if x > 0.5 { f64::NAN } else { x };
        match integrate_panels(&f, 0.0, 1.0, 0.25, 1e-10) {
            Err(Error::NonFiniteIntegrand { x, .. }) => assert!(x > 0.5),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }
}
