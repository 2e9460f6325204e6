//! Scalar real functions consumed and produced by the construction:
//! generator functions with analytic derivatives and memoized cumulative
//! integrals.

pub mod quadrature;

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::Result;

/// Shared, thread-safe real function of one real variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wraps a closure as a [`RealFn`].
pub fn real_fn<F>(f: F) -> RealFn
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Relative tolerance for derivative consistency checks.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-5;

/// Finite-difference step as a fraction of `scale_hint`.
pub const FD_STEP_FRACTION: f64 = 1e-4;

/// A smooth function with derivatives up to third order.
///
/// Used both for W₊ (Method A) and φ (Method B).
#[derive(Clone)]
pub struct GeneratorFunction {
    eval: RealFn,
    d1: RealFn,
    d2: RealFn,
    d3: RealFn,
    scale_hint: f64,
    label: String,
    numeric: bool,
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorFunction")
            .field("label", &self.label)
            .field("scale_hint", &self.scale_hint)
            .field("numeric", &self.numeric)
            .finish()
    }
}

impl GeneratorFunction {
    /// Builds a generator from a function and its first three derivatives.
    pub fn make_analytic(
        eval: RealFn,
        d1: RealFn,
        d2: RealFn,
        d3: RealFn,
        scale_hint: f64,
        label: impl Into<String>,
    ) -> Self {
        assert!(scale_hint > 0.0 && scale_hint.is_finite(), "scale_hint must be positive");
        Self { eval, d1, d2, d3, scale_hint, label: label.into(), numeric: false }
    }

    /// Fallback adapter: derivatives by nested central differences with
    /// step `scale_hint·1e-4`. Models built from it are flagged as numeric.
    pub fn with_numeric_derivatives(eval: RealFn, scale_hint: f64, label: impl Into<String>) -> Self {
        let h = scale_hint * FD_STEP_FRACTION;
        let d1 = central_difference(eval.clone(), h);
        let d2 = central_difference(d1.clone(), h);
        let d3 = central_difference(d2.clone(), h);
        let mut g = Self::make_analytic(eval, d1, d2, d3, scale_hint, label);
        g.numeric = true;
        g
    }

    /// Replaces only the third derivative with a five-point central
    /// difference of the second (step `scale_hint·1e-3`). Flags the
    /// generator as numeric.
    pub fn with_numeric_third(mut self) -> Self {
        let h = self.scale_hint * 1e-3;
        let d2 = self.d2.clone();
        self.d3 = Arc::new(move |x| (d2(x - 2.0 * h) - 8.0 * d2(x - h) + 8.0 * d2(x + h) - d2(x + 2.0 * h)) / (12.0 * h));
        self.numeric = true;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    pub fn deriv3(&self, x: f64) -> f64 {
        (self.d3)(x)
    }

    pub fn scale_hint(&self) -> f64 {
        self.scale_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when any derivative comes from finite differences.
    pub fn is_numeric(&self) -> bool {
        self.numeric
    }

    pub fn eval_fn(&self) -> RealFn {
        self.eval.clone()
    }

    pub fn deriv1_fn(&self) -> RealFn {
        self.d1.clone()
    }

    pub fn deriv2_fn(&self) -> RealFn {
        self.d2.clone()
    }

    pub fn deriv3_fn(&self) -> RealFn {
        self.d3.clone()
    }

    /// Returns a copy with a new scale hint.
    pub fn with_scale_hint(mut self, scale_hint: f64) -> Self {
        assert!(scale_hint > 0.0 && scale_hint.is_finite(), "scale_hint must be positive");
        self.scale_hint = scale_hint;
        self
    }
}

fn central_difference(f: RealFn, h: f64) -> RealFn {
    Arc::new(move |x| (f(x + h) - f(x - h)) / (2.0 * h))
}

/// Which derivative a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DerivativeOrder {
    Value,
    First,
    Second,
    Third,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum DiagnosticKind {
    /// Supplied derivative disagrees with the finite-difference estimate.
    Mismatch { supplied: f64, estimate: f64, relative: f64 },
    NonFinite { value: f64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DerivativeDiagnostic {
    pub x: f64,
    pub order: DerivativeOrder,
    pub kind: DiagnosticKind,
}

/// Compares each supplied derivative against a central difference of the
/// next-lower one. An empty result means every point is within
/// [`DERIVATIVE_TOLERANCE`] (relative, with a unit floor on the scale).
pub fn validate_derivatives(f: &GeneratorFunction, sample_points: &[f64]) -> Vec<DerivativeDiagnostic> {
    let h = f.scale_hint * FD_STEP_FRACTION;
    let lower: [(&RealFn, &RealFn, DerivativeOrder); 3] = [
        (&f.eval, &f.d1, DerivativeOrder::First),
        (&f.d1, &f.d2, DerivativeOrder::Second),
        (&f.d2, &f.d3, DerivativeOrder::Third),
    ];
    let mut out = Vec::new();
    for &x in sample_points {
        let v = f.eval(x);
        if !v.is_finite() {
            out.push(DerivativeDiagnostic {
                x,
                order: DerivativeOrder::Value,
                kind: DiagnosticKind::NonFinite { value: v },
            });
            continue;
        }
        for (below, supplied_fn, order) in lower {
            let supplied = supplied_fn(x);
            if !supplied.is_finite() {
                out.push(DerivativeDiagnostic { x, order, kind: DiagnosticKind::NonFinite { value: supplied } });
                continue;
            }
            let estimate = (below(x + h) - below(x - h)) / (2.0 * h);
            let relative = (supplied - estimate).abs() / supplied.abs().max(estimate.abs()).max(1.0);
            if !(relative <= DERIVATIVE_TOLERANCE) {
                out.push(DerivativeDiagnostic {
                    x,
                    order,
                    kind: DiagnosticKind::Mismatch { supplied, estimate, relative },
                });
            }
        }
    }
    out
}

/// Quadrature settings for [`cumulative_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub panel_width: f64,
    pub panel_tolerance: f64,
}

impl QuadratureSpec {
    /// Panels of width `scale_hint/8`, absolute tolerance 1e-10 per panel.
    pub fn for_scale(scale_hint: f64) -> Self {
        Self { panel_width: scale_hint / 8.0, panel_tolerance: 1e-10 }
    }
}

/// ∫ from `base_point` to x of an integrand, memoizing whole-panel sums on
/// each side of the base point.
pub struct CumulativeIntegral {
    integrand: RealFn,
    base_point: f64,
    spec: QuadratureSpec,
    right: RwLock<Vec<f64>>,
    left: RwLock<Vec<f64>>,
}

impl fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("base_point", &self.base_point)
            .field("spec", &self.spec)
            .finish()
    }
}

/// Builds the cumulative integral of `integrand` anchored at `base_point`.
pub fn cumulative_integral(integrand: RealFn, base_point: f64, spec: QuadratureSpec) -> CumulativeIntegral {
    assert!(spec.panel_width > 0.0, "panel width must be positive");
    CumulativeIntegral {
        integrand,
        base_point,
        spec,
        right: RwLock::new(vec![0.0]),
        left: RwLock::new(vec![0.0]),
    }
}

impl CumulativeIntegral {
    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn integrand(&self) -> &RealFn {
        &self.integrand
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    /// ∫_{base}^{x} f.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let d = x - self.base_point;
        if d == 0.0 {
            return Ok(0.0);
        }
        let w = self.spec.panel_width;
        let full = (d.abs() / w).floor() as usize;
        let (store, sign) = if d > 0.0 { (&self.right, 1.0) } else { (&self.left, -1.0) };
        let prefix = self.prefix(store, full, sign)?;
        let edge = self.base_point + sign * w * full as f64;
        let f = &*self.integrand;
        let tail = quadrature::adaptive_panel(f, edge, x, self.spec.panel_tolerance)?;
        Ok(sign * prefix + tail)
    }

    /// Like [`eval`](Self::eval) but maps quadrature failures to NaN.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }

    /// Sum of the first `n` panels on one side, oriented away from base.
    fn prefix(&self, store: &RwLock<Vec<f64>>, n: usize, sign: f64) -> Result<f64> {
        {
            let cached = store.read().expect("panel cache poisoned");
            if let Some(&v) = cached.get(n) {
                return Ok(v);
            }
        }
        let mut cached = store.write().expect("panel cache poisoned");
        let w = self.spec.panel_width;
        let f = &*self.integrand;
        while cached.len() <= n {
            let k = cached.len() - 1;
            let a = self.base_point + sign * w * k as f64;
            let b = self.base_point + sign * w * (k + 1) as f64;
            let (lo, hi) = if sign > 0.0 { (a, b) } else { (b, a) };
            let panel = quadrature::adaptive_panel(f, lo, hi, self.spec.panel_tolerance)?;
            let last = *cached.last().expect("cache starts non-empty");
            cached.push(last + panel);
        }
        Ok(cached[n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> GeneratorFunction {
        GeneratorFunction::make_analytic(
            real_fn(|x| 2.0 * x + x.powi(3)),
            real_fn(|x| 2.0 + 3.0 * x * x),
            real_fn(|x| 6.0 * x),
            real_fn(|_| 6.0),
            1.0,
            "2x+x^3",
        )
    }

    #[test]
    fn linear_generator() {
        let f = GeneratorFunction::make_analytic(
            real_fn(|x| x),
            real_fn(|_| 1.0),
            real_fn(|_| 0.0),
            real_fn(|_| 0.0),
            1.0,
            "x",
        );
        assert_eq!(f.deriv1(5.0), 1.0);
        assert!(validate_derivatives(&f, &[-1.0, 0.0, 2.0]).is_empty());
    }

    #[test]
    fn cubic_derivatives_at_origin() {
        let f = cubic();
        assert_eq!(f.deriv1(0.0), 2.0);
        assert_eq!(f.deriv2(0.0), 0.0);
        assert_eq!(f.deriv3(0.0), 6.0);
        // finite-difference cross-check
        let h = 1e-4;
        let fd = (f.eval(h) - f.eval(-h)) / (2.0 * h);
        assert!((fd - 2.0).abs() < 1e-7);
        assert!(validate_derivatives(&f, &[-3.0, 0.0, 3.0]).is_empty());
    }

    #[test]
    fn sinh_derivatives() {
        let f = GeneratorFunction::make_analytic(
            real_fn(f64::sinh),
            real_fn(f64::cosh),
            real_fn(f64::sinh),
            real_fn(f64::cosh),
            1.0,
            "sinh",
        );
        assert_eq!(f.deriv1(0.0), 1.0);
        assert_eq!(f.deriv2(0.0), 0.0);
    }

    #[test]
    fn wrong_derivative_is_flagged_everywhere() {
        let f = GeneratorFunction::make_analytic(
            real_fn(|x| x),
            real_fn(|_| 2.0),
            real_fn(|_| 0.0),
            real_fn(|_| 0.0),
            1.0,
            "bad",
        );
        let samples = [-2.0, -0.5, 0.0, 1.0, 4.0];
        let diags = validate_derivatives(&f, &samples);
        assert_eq!(diags.len(), samples.len());
        assert!(diags.iter().all(|d| d.order == DerivativeOrder::First));
    }

    #[test]
    fn non_finite_values_are_reported() {
        let f = GeneratorFunction::make_analytic(
            real_fn(|x| 1.0 / x),
            real_fn(|x| -1.0 / (x * x)),
            real_fn(|x| 2.0 / x.powi(3)),
            real_fn(|x| -6.0 / x.powi(4)),
            1.0,
            "1/x",
        );
        let diags = validate_derivatives(&f, &[0.0]);
        assert!(matches!(diags[0].kind, DiagnosticKind::NonFinite { .. }));
    }

    #[test]
    fn numeric_adapter_is_flagged_and_close() {
        let g = GeneratorFunction::with_numeric_derivatives(real_fn(|x| x.powi(3)), 1.0, "x^3");
        assert!(g.is_numeric());
        assert!((g.deriv1(2.0) - 12.0).abs() < 1e-6);
        assert!((g.deriv2(2.0) - 12.0).abs() < 1e-4);
    }

    #[test]
    fn integral_of_x() {
        let ci = cumulative_integral(real_fn(|x| x), 0.0, QuadratureSpec::for_scale(1.0));
        assert_eq!(ci.eval(0.0).unwrap(), 0.0);
        assert!((ci.eval(2.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((ci.eval(-2.0).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn integral_of_rational() {
        let ci = cumulative_integral(real_fn(|x| x / (1.0 + x * x)), 0.0, QuadratureSpec::for_scale(1.0));
        let oracle = 0.5 * (2f64).ln();
        assert!((ci.eval(1.0).unwrap() - oracle).abs() < 1e-13);
        assert!((oracle - 0.34657).abs() < 1e-5);
    }

    #[test]
    fn integral_reports_non_finite_abscissa() {
        let ci = cumulative_integral(real_fn(|x| (1.0 - x).ln()), 0.0, QuadratureSpec::for_scale(1.0));
        let err = ci.eval(3.0).unwrap_err().to_string();
        assert!(err.contains("at x = 1."), "{err}");
        assert!(ci.value(3.0).is_nan());
        assert!(ci.eval(0.5).is_ok());
    }

    #[test]
    fn concurrent_queries_match_serial() {
        let f = real_fn(|x: f64| (x * 0.3).sin() * (-0.01 * x * x).exp() + 0.1 * x);
        let serial = cumulative_integral(f.clone(), 0.5, QuadratureSpec::for_scale(1.0));
        let xs: Vec<f64> = (0..64).map(|i| -20.0 + 0.65 * i as f64).collect();
        let expected: Vec<f64> = xs.iter().map(|&x| serial.eval(x).unwrap()).collect();
        let shared = cumulative_integral(f, 0.5, QuadratureSpec::for_scale(1.0));
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..4)
                .map(|t| {
                    let shared = &shared;
                    let xs = &xs;
                    s.spawn(move || {
                        xs.iter().rev().skip(t).map(|&x| (x, shared.eval(x).unwrap())).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (x, v) in h.join().unwrap() {
                    let i = xs.iter().position(|&y| y == x).unwrap();
                    assert_eq!(v.to_bits(), expected[i].to_bits());
                }
            }
        });
    }
}
