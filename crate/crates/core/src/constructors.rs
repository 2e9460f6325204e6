//! The two construction routes from a single generator to a [`QesModel`].
//!
//! Method A takes W₊ = W₁ + W with a single transversal zero x₀ and solves
//! W₊′ = W₋W₊ + 2ε for W₋ = W₁ − W, cancelling the pole at x₀ with
//! ε = W₊′(x₀)/2. Method B takes W₋ = −φ″/φ′ for a monotone φ with one node
//! and gets W₊ = 2εφ/φ′.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::quadrature::GaussLegendre;
use crate::funcspace::{cumulative_integral, real_fn, GeneratorFunction, QuadratureSpec, RealFn};
use crate::susy::{
    check_sign_condition, ground_state_minus, pair_potentials, riccati_residual, riccati_residual_scaled,
    Eigenstate, PotentialPair, Superpotential,
};
use crate::verify::count_nodes;

/// Points on the default probe grid.
pub const PROBE_POINTS: usize = 401;
/// Probe grid half-width in units of `scale_hint`.
pub const PROBE_HALF_WIDTH: f64 = 8.0;

/// Inside this distance (×scale) R uses its first-order Taylor form.
const TAYLOR_WINDOW: f64 = 1e-8;
/// Inside this distance (×scale) R uses quadrature mean values.
const MEAN_VALUE_WINDOW: f64 = 1e-3;
/// Maximum number of doublings of the initial zero search radius.
const MAX_RADIUS_DOUBLINGS: u32 = 6;

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    MethodA { generator: String },
    MethodB { generator: String, epsilon: f64 },
    Family { name: String, params: BTreeMap<String, f64> },
}

/// Closed-form expressions attached by the example families.
#[derive(Clone)]
pub struct ClosedForm {
    pub v_minus: RealFn,
    pub v_plus: Option<RealFn>,
    pub psi0: RealFn,
    pub psi1: RealFn,
}

/// A constructed potential with two analytically known eigenstates.
#[derive(Clone)]
pub struct QesModel {
    pub w: Superpotential,
    pub w1: Superpotential,
    /// E₁⁻, the factorization energy.
    pub epsilon: f64,
    /// Node of ψ₁⁻.
    pub x0: f64,
    pub scale_hint: f64,
    pub w_plus: RealFn,
    pub w_plus_prime: RealFn,
    pub potentials: PotentialPair,
    pub psi0: Eigenstate,
    pub psi1: Eigenstate,
    pub provenance: Provenance,
    pub closed_form: Option<ClosedForm>,
    /// Set when the generator used finite-difference derivatives.
    pub numeric_derivatives: bool,
}

impl fmt::Debug for QesModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QesModel")
            .field("epsilon", &self.epsilon)
            .field("x0", &self.x0)
            .field("scale_hint", &self.scale_hint)
            .field("provenance", &self.provenance)
            .field("closed_form", &self.closed_form.is_some())
            .field("numeric_derivatives", &self.numeric_derivatives)
            .finish()
    }
}

/// Summary of the structural invariants of a model on its probe grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModelCheck {
    pub riccati_sup: f64,
    pub riccati_scaled_sup: f64,
    /// sup |W₊′ − (W₁ − W)W₊ − 2ε|.
    pub linear_form_sup: f64,
    pub w_plus_sign_changes: usize,
    pub psi0_nodes: usize,
    pub psi1_nodes: usize,
    /// ∫W₊ dx at x₀ ∓ 8s and x₀ ∓ 16s (left then right); must grow outward.
    pub surface_exponents: [f64; 4],
    pub surface_term_decays: bool,
}

impl QesModel {
    /// 401 points over [x₀ − 8s, x₀ + 8s].
    pub fn probe_grid(&self) -> Vec<f64> {
        probe_grid_around(self.x0, self.scale_hint)
    }

    pub fn v_minus(&self, x: f64) -> f64 {
        self.potentials.v_minus(x)
    }

    pub fn v_plus(&self, x: f64) -> f64 {
        self.potentials.v_plus(x)
    }

    pub fn riccati_residual(&self, x: f64) -> f64 {
        riccati_residual(&self.w, &self.w1, self.epsilon, x)
    }

    pub fn check(&self) -> ModelCheck {
        let grid = self.probe_grid();
        let mut riccati_sup = 0.0f64;
        let mut riccati_scaled_sup = 0.0f64;
        let mut linear_form_sup = 0.0f64;
        for &x in &grid {
            riccati_sup = riccati_sup.max(self.riccati_residual(x).abs());
            riccati_scaled_sup = riccati_scaled_sup.max(riccati_residual_scaled(&self.w, &self.w1, self.epsilon, x));
            let wm = self.w1.w(x) - self.w.w(x);
            let r = (self.w_plus_prime)(x) - wm * (self.w_plus)(x) - 2.0 * self.epsilon;
            linear_form_sup = linear_form_sup.max(r.abs());
        }
        let sum: Vec<f64> = grid.iter().map(|&x| self.w.w(x) + self.w1.w(x)).collect();
        let psi0: Vec<f64> = grid.iter().map(|&x| self.psi0.psi(x)).collect();
        let psi1: Vec<f64> = grid.iter().map(|&x| self.psi1.psi(x)).collect();

        let wp = cumulative_integral(self.w_plus.clone(), self.x0, QuadratureSpec::for_scale(self.scale_hint));
        let r = PROBE_HALF_WIDTH * self.scale_hint;
        let surface_exponents =
            [wp.value(self.x0 - r), wp.value(self.x0 - 2.0 * r), wp.value(self.x0 + r), wp.value(self.x0 + 2.0 * r)];
        let surface_term_decays = surface_exponents[1] > surface_exponents[0]
            && surface_exponents[3] > surface_exponents[2]
            && surface_exponents[0] > 0.0
            && surface_exponents[2] > 0.0;

        ModelCheck {
            riccati_sup,
            riccati_scaled_sup,
            linear_form_sup,
            w_plus_sign_changes: sign_changes(&sum),
            psi0_nodes: count_nodes(&psi0, None),
            psi1_nodes: count_nodes(&psi1, None),
            surface_exponents,
            surface_term_decays,
        }
    }
}

pub(crate) fn probe_grid_around(center: f64, scale: f64) -> Vec<f64> {
    let r = PROBE_HALF_WIDTH * scale;
    linspace(center - r, center + r, PROBE_POINTS)
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * (i as f64 / last) }).collect()
}

fn sign_changes(values: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for &v in values {
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Locates the single sign change of `w_plus` on [−r, r].
///
/// The probe grid (401 points) certifies uniqueness; the bracket is then
/// closed by Brent's method to machine precision.
pub fn find_single_zero(w_plus: &GeneratorFunction, search_radius: f64) -> Result<f64> {
    let f = |x: f64| w_plus.eval(x);
    let grid = linspace(-search_radius, search_radius, PROBE_POINTS);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::SignCondition(format!("W₊ not finite at x = {}", grid[i])));
    }
    let changes = sign_changes(&values);
    if changes == 0 {
        return Err(Error::SignCondition(format!("W₊ has no sign change on [−{search_radius}, {search_radius}]")));
    }
    if changes > 1 {
        return Err(Error::MultipleZeros { count: changes });
    }
    if !(values[0] < 0.0 && values[values.len() - 1] > 0.0) {
        return Err(Error::SignCondition("W₊ must go from negative to positive".into()));
    }
    if let Some(i) = values.iter().position(|&v| v == 0.0) {
        return Ok(grid[i]);
    }
    let i = values.windows(2).position(|p| p[0] < 0.0 && p[1] > 0.0).expect("one sign change");
    Ok(brent(f, grid[i], grid[i + 1], values[i], values[i + 1]))
}

/// Brent's bracketing root finder; runs until the bracket stops shrinking.
fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fb.abs() > fa.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 {
            return b;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        if (b - a).abs() <= tol {
            break;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let between = if lo < b { s > lo && s < b } else { s > b && s < lo };
        let bisect = !between
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < tol)
            || (!mflag && (c - d).abs() < tol);
        if bisect {
            s = 0.5 * (a + b);
        }
        mflag = bisect;
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa < 0.0) != (fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

/// ε = W₊′(x₀)/2.
pub fn epsilon_from_wplus(w_plus: &GeneratorFunction, x0: f64) -> Result<f64> {
    let slope = w_plus.deriv1(x0);
    if !(slope > 0.0) {
        return Err(Error::BadZero { x0, slope });
    }
    Ok(slope / 2.0)
}

fn locate_zero(g: &GeneratorFunction) -> Result<f64> {
    let mut r = PROBE_HALF_WIDTH * g.scale_hint();
    for _ in 0..MAX_RADIUS_DOUBLINGS {
        if g.eval(-r) < 0.0 && g.eval(r) > 0.0 {
            break;
        }
        r *= 2.0;
    }
    find_single_zero(g, r)
}

fn ensure_admissible(w: &Superpotential, name: &str) -> Result<()> {
    let check = check_sign_condition(w, w.default_probe_radius());
    if check.passed {
        Ok(())
    } else {
        Err(Error::Inadmissible(format!("{name} violates the asymptotic sign condition: {:?}", check.samples)))
    }
}

/// R(x) = (W₊′(x) − W₊′(x₀))/W₊(x) with its removable singularity at x₀.
struct PoleFreeQuotient {
    p: GeneratorFunction,
    x0: f64,
    c: f64,
    r0: f64,
    r1: f64,
    taylor: f64,
    mean: f64,
}

impl PoleFreeQuotient {
    fn new(p: GeneratorFunction, x0: f64) -> Self {
        let c = p.deriv1(x0);
        let s = p.deriv2(x0);
        let t = p.deriv3(x0);
        let scale = p.scale_hint();
        Self {
            x0,
            c,
            r0: s / c,
            r1: t / (2.0 * c) - s * s / (2.0 * c * c),
            taylor: TAYLOR_WINDOW * scale,
            mean: MEAN_VALUE_WINDOW * scale,
            p,
        }
    }

    /// (R, W₊) with W₊ from quadrature near x₀ so both share one rounding path.
    fn value_and_denominator(&self, x: f64) -> (f64, f64) {
        let u = x - self.x0;
        if u.abs() < self.taylor {
            (self.r0 + self.r1 * u, self.c * u)
        } else if u.abs() < self.mean {
            let rule = GaussLegendre::default_rule();
            let (mut num, mut den) = (0.0, 0.0);
            for (t, wt) in rule.nodes().iter().zip(rule.weights()) {
                let xi = self.x0 + 0.5 * u * (1.0 + t);
                num += wt * self.p.deriv2(xi);
                den += wt * self.p.deriv1(xi);
            }
            (num / den, 0.5 * u * den)
        } else {
            let pv = self.p.eval(x);
            ((self.p.deriv1(x) - self.c) / pv, pv)
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.value_and_denominator(x).0
    }

    /// R′ = (W₊″ − R·W₊′)/W₊, which follows from R·W₊ = W₊′ − c.
    fn derivative(&self, x: f64) -> f64 {
        let u = x - self.x0;
        if u.abs() < self.taylor {
            return self.r1;
        }
        let (r, den) = self.value_and_denominator(x);
        (self.p.deriv2(x) - r * self.p.deriv1(x)) / den
    }
}

/// Method A: superpotentials W = ½(W₊ − R), W₁ = ½(W₊ + R) and the states
/// ψ₀⁻ = exp(−∫W), ψ₁⁻ = W₊·exp(−∫W₁).
pub fn method_a_build(w_plus: &GeneratorFunction) -> Result<QesModel> {
    let scale = w_plus.scale_hint();
    let x0 = locate_zero(w_plus)?;
    let epsilon = epsilon_from_wplus(w_plus, x0)?;
    let q = Arc::new(PoleFreeQuotient::new(w_plus.clone(), x0));

    let p = w_plus.clone();
    let qq = q.clone();
    let w_fn = real_fn(move |x| 0.5 * (p.eval(x) - qq.value(x)));
    let p = w_plus.clone();
    let qq = q.clone();
    let wp_fn = real_fn(move |x| 0.5 * (p.deriv1(x) - qq.derivative(x)));
    let p = w_plus.clone();
    let qq = q.clone();
    let w1_fn = real_fn(move |x| 0.5 * (p.eval(x) + qq.value(x)));
    let p = w_plus.clone();
    let qq = q;
    let w1p_fn = real_fn(move |x| 0.5 * (p.deriv1(x) + qq.derivative(x)));

    let label = w_plus.label().to_string();
    let w = Superpotential::new(w_fn, wp_fn, x0, scale, format!("W[{label}]"));
    let w1 = Superpotential::new(w1_fn, w1p_fn, x0, scale, format!("W1[{label}]"));
    ensure_admissible(&w, "W")?;
    ensure_admissible(&w1, "W₁")?;

    let mut psi0 = ground_state_minus(&w)?;
    psi0.node_count = Some(0);

    let integral = Arc::new(cumulative_integral(w1.w_fn(), x0, QuadratureSpec::for_scale(scale)));
    let (p, i1) = (w_plus.clone(), integral.clone());
    let psi1 = real_fn(move |x| p.eval(x) * (-i1.value(x)).exp());
    let (p, i1, w1f) = (w_plus.clone(), integral, w1.w_fn());
    let psi1_prime = real_fn(move |x| (p.deriv1(x) - p.eval(x) * w1f(x)) * (-i1.value(x)).exp());
    let psi1 = Eigenstate { energy: epsilon, psi: psi1, psi_prime: Some(psi1_prime), norm_constant: None, node_count: Some(1) };

    Ok(QesModel {
        potentials: pair_potentials(&w),
        w,
        w1,
        epsilon,
        x0,
        scale_hint: scale,
        w_plus: w_plus.eval_fn(),
        w_plus_prime: w_plus.deriv1_fn(),
        psi0,
        psi1,
        provenance: Provenance::MethodA { generator: label },
        closed_form: None,
        numeric_derivatives: w_plus.is_numeric(),
    })
}

/// Method B: W = (½φ″ + εφ)/φ′, W₁ = (εφ − ½φ″)/φ′ and
/// ψ₀⁻ = φ′^{−1/2} exp(−ε∫φ/φ′), ψ₁⁻ = φ·ψ₀⁻.
pub fn method_b_build(phi: &GeneratorFunction, epsilon: f64) -> Result<QesModel> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Parameter(format!("epsilon must be > 0 (got {epsilon})")));
    }
    let scale = phi.scale_hint();
    let x0 = locate_zero(phi)?;
    for x in probe_grid_around(x0, scale) {
        let slope = phi.deriv1(x);
        if !(slope > 0.0) {
            return Err(Error::NotMonotone { x, slope });
        }
    }

    // W = g/φ′ with g = ½φ″ ± εφ
    let make = |sign: f64| -> (RealFn, RealFn) {
        let f = phi.clone();
        let value = real_fn(move |x| (sign * 0.5 * f.deriv2(x) + epsilon * f.eval(x)) / f.deriv1(x));
        let f = phi.clone();
        let deriv = real_fn(move |x| {
            let (v, d1, d2, d3) = (f.eval(x), f.deriv1(x), f.deriv2(x), f.deriv3(x));
            let g = sign * 0.5 * d2 + epsilon * v;
            let dg = sign * 0.5 * d3 + epsilon * d1;
            (dg * d1 - g * d2) / (d1 * d1)
        });
        (value, deriv)
    };
    let (w_fn, wp_fn) = make(1.0);
    let (w1_fn, w1p_fn) = make(-1.0);
    let label = phi.label().to_string();
    let w = Superpotential::new(w_fn, wp_fn, x0, scale, format!("W[φ={label}]"));
    let w1 = Superpotential::new(w1_fn, w1p_fn, x0, scale, format!("W1[φ={label}]"));
    ensure_admissible(&w, "W")?;
    ensure_admissible(&w1, "W₁")?;

    let f = phi.clone();
    let ratio = cumulative_integral(real_fn(move |x| f.eval(x) / f.deriv1(x)), x0, QuadratureSpec::for_scale(scale));
    let ratio = Arc::new(ratio);
    let (f, j) = (phi.clone(), ratio.clone());
    let psi0 = real_fn(move |x| (-epsilon * j.value(x)).exp() / f.deriv1(x).sqrt());
    let (p0, wf) = (psi0.clone(), w.w_fn());
    let psi0_prime = real_fn(move |x| -wf(x) * p0(x));
    let (f, p0) = (phi.clone(), psi0.clone());
    let psi1 = real_fn(move |x| f.eval(x) * p0(x));
    let (f, p0, d0) = (phi.clone(), psi0.clone(), psi0_prime.clone());
    let psi1_prime = real_fn(move |x| f.deriv1(x) * p0(x) + f.eval(x) * d0(x));

    let f = phi.clone();
    let w_plus = real_fn(move |x| 2.0 * epsilon * f.eval(x) / f.deriv1(x));
    let f = phi.clone();
    let w_plus_prime = real_fn(move |x| {
        let d1 = f.deriv1(x);
        2.0 * epsilon * (1.0 - f.eval(x) * f.deriv2(x) / (d1 * d1))
    });

    Ok(QesModel {
        potentials: pair_potentials(&w),
        w,
        w1,
        epsilon,
        x0,
        scale_hint: scale,
        w_plus,
        w_plus_prime,
        psi0: Eigenstate { energy: 0.0, psi: psi0, psi_prime: Some(psi0_prime), norm_constant: None, node_count: Some(0) },
        psi1: Eigenstate { energy: epsilon, psi: psi1, psi_prime: Some(psi1_prime), norm_constant: None, node_count: Some(1) },
        provenance: Provenance::MethodB { generator: label, epsilon },
        closed_form: None,
        numeric_derivatives: phi.is_numeric(),
    })
}

/// W₊ = 2εφ/φ′ as a generator for Method A. The third derivative would need
/// φ⁗, so it comes from a five-point difference of the second.
pub fn wplus_from_phi(phi: &GeneratorFunction, epsilon: f64) -> GeneratorFunction {
    let f = phi.clone();
    let eval = real_fn(move |x| 2.0 * epsilon * f.eval(x) / f.deriv1(x));
    let f = phi.clone();
    let d1 = real_fn(move |x| {
        let p1 = f.deriv1(x);
        2.0 * epsilon * (1.0 - f.eval(x) * f.deriv2(x) / (p1 * p1))
    });
    let f = phi.clone();
    let d2 = real_fn(move |x| {
        let (v, p1, p2, p3) = (f.eval(x), f.deriv1(x), f.deriv2(x), f.deriv3(x));
        let q = p2 / p1 + v * p3 / (p1 * p1) - 2.0 * v * p2 * p2 / (p1 * p1 * p1);
        -2.0 * epsilon * q
    });
    let d3 = d2.clone();
    GeneratorFunction::make_analytic(eval, d1, d2, d3, phi.scale_hint(), format!("2εφ/φ′[{}]", phi.label()))
        .with_numeric_third()
}

/// Discrepancies between Method A (on W₊ = 2εφ/φ′) and Method B.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossCheck {
    pub v_minus_sup: f64,
    pub psi0_sup: f64,
    pub psi1_sup: f64,
    pub epsilon_diff: f64,
    pub x0_diff: f64,
}

impl CrossCheck {
    pub fn max(&self) -> f64 {
        [self.v_minus_sup, self.psi0_sup, self.psi1_sup, self.epsilon_diff, self.x0_diff]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn cross_check_methods(phi: &GeneratorFunction, epsilon: f64) -> Result<CrossCheck> {
    let b = method_b_build(phi, epsilon)?;
    let a = method_a_build(&wplus_from_phi(phi, epsilon))?;
    let grid = b.probe_grid();
    let v_minus_sup = grid.iter().map(|&x| (a.v_minus(x) - b.v_minus(x)).abs()).fold(0.0, f64::max);
    Ok(CrossCheck {
        v_minus_sup,
        psi0_sup: normalized_difference(&grid, &a.psi0.psi, &b.psi0.psi),
        psi1_sup: normalized_difference(&grid, &a.psi1.psi, &b.psi1.psi),
        epsilon_diff: (a.epsilon - b.epsilon).abs(),
        x0_diff: (a.x0 - b.x0).abs(),
    })
}

/// sup |f/‖f‖∞ − g/‖g‖∞| after aligning signs.
pub(crate) fn normalized_difference(grid: &[f64], f: &RealFn, g: &RealFn) -> f64 {
    let fv: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let gv: Vec<f64> = grid.iter().map(|&x| g(x)).collect();
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    // odd states peak at ±x, so align signs by overlap rather than by the peak
    let overlap: f64 = fv.iter().zip(&gv).map(|(a, b)| a * b).sum();
    let (fp, gp) = (peak(&fv), peak(&gv) * overlap.signum());
    fv.iter().zip(&gv).map(|(a, b)| (a / fp - b / gp).abs()).fold(0.0, f64::max)
}
