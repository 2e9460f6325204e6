//! Closed-form example families: the polynomial W₊ = ax + bx³, the
//! polynomial φ = ax + bx³/3 (with its exactly solvable point ε = 3b/2a),
//! and the shifted-sinh W₊ = A(sinh αx − sinh αx₀).
//!
//! Every family goes through the generic constructors; closed forms are
//! attached next to the result so the two can be compared.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::constructors::{method_a_build, method_b_build, ClosedForm, Provenance, QesModel};
use crate::error::{Error, Result};
use crate::funcspace::{real_fn, GeneratorFunction, RealFn};
use crate::susy::{apply_raising, Eigenstate};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be > 0 (got {v})")))
    }
}

/// W₊ = ax + bx³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyWplusParams {
    pub a: f64,
    pub b: f64,
}

impl PolyWplusParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        Ok(Self { a, b })
    }

    /// Shorter of the Gaussian (√(2/a)) and quartic ((8/b)^¼) decay lengths.
    pub fn scale_hint(&self) -> f64 {
        (2.0 / self.a).sqrt().min((8.0 / self.b).powf(0.25))
    }

    pub fn generator(&self) -> GeneratorFunction {
        let Self { a, b } = *self;
        GeneratorFunction::make_analytic(
            real_fn(move |x| a * x + b * x * x * x),
            real_fn(move |x| a + 3.0 * b * x * x),
            real_fn(move |x| 6.0 * b * x),
            real_fn(move |_| 6.0 * b),
            self.scale_hint(),
            format!("{a}x + {b}x^3"),
        )
    }

    pub fn v_minus(&self, x: f64) -> f64 {
        let Self { a, b } = *self;
        let d = a + b * x * x;
        let x2 = x * x;
        (a * a - 12.0 * b) / 8.0 * x2 + a * b / 4.0 * x2 * x2 + b * b / 8.0 * x2 * x2 * x2
            + 3.0 * a * b / (8.0 * d * d)
            + 3.0 * b / (8.0 * d)
            - a / 4.0
    }

    pub fn psi0(&self, x: f64) -> f64 {
        let Self { a, b } = *self;
        (a + b * x * x).powf(0.75) * (-x * x * (2.0 * a + b * x * x) / 8.0).exp()
    }

    pub fn psi1(&self, x: f64) -> f64 {
        let Self { a, b } = *self;
        x * (a + b * x * x).powf(0.25) * (-x * x * (2.0 * a + b * x * x) / 8.0).exp()
    }
}

pub fn poly_wplus_model(p: PolyWplusParams) -> Result<QesModel> {
    let mut m = method_a_build(&p.generator())?;
    m.provenance = family_provenance(Family::PolyWplus, &[("a", p.a), ("b", p.b)]);
    m.closed_form = Some(ClosedForm {
        v_minus: real_fn(move |x| p.v_minus(x)),
        v_plus: None,
        psi0: real_fn(move |x| p.psi0(x)),
        psi1: real_fn(move |x| p.psi1(x)),
    });
    Ok(m)
}

/// φ = ax + bx³/3 at factorization energy ε, with the coefficients of
/// V₋ = A₋x²/2 + B₋/(a+bx²) + D₋/(a+bx²)² + R₋ and
/// V₊ = A₊x²/2 + D₊/(a+bx²)² + R₊.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyPhiParams {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub b_minus: f64,
    pub r_minus: f64,
    /// R₋ + ε/3: V₊ − V₋ = W′ tends to ε/3 at infinity.
    pub r_plus: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

impl PolyPhiParams {
    pub fn new(a: f64, b: f64, epsilon: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        positive("epsilon", epsilon)?;
        let e = epsilon;
        let r_minus = e / (18.0 * b) * (3.0 * b + 4.0 * a * e);
        Ok(Self {
            a,
            b,
            epsilon,
            a_minus: e * e / 9.0,
            a_plus: e * e / 9.0,
            b_minus: b + 2.0 * a * e / 3.0,
            r_minus,
            r_plus: r_minus + e / 3.0,
            d_minus: -(27.0 * a * b * b + 24.0 * a * a * b * e + 4.0 * a.powi(3) * e * e) / (18.0 * b),
            d_plus: (9.0 * a * b * b - 4.0 * a.powi(3) * e * e) / (18.0 * b),
        })
    }

    /// The exactly solvable point ε = 3b/2a.
    pub fn ces(a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        Self::new(a, b, 1.5 * b / a)
    }

    pub fn scale_hint(&self) -> f64 {
        (3.0 / self.epsilon).sqrt().min((self.a / self.b).sqrt())
    }

    pub fn generator(&self) -> GeneratorFunction {
        phi_generator(self.a, self.b, self.scale_hint())
    }

    pub fn v_minus(&self, x: f64) -> f64 {
        let d = self.a + self.b * x * x;
        self.a_minus / 2.0 * x * x + self.b_minus / d + self.d_minus / (d * d) + self.r_minus
    }

    pub fn v_plus(&self, x: f64) -> f64 {
        let d = self.a + self.b * x * x;
        self.a_plus / 2.0 * x * x + self.d_plus / (d * d) + self.r_plus
    }

    fn exponent(&self) -> f64 {
        -0.5 - self.a * self.epsilon / (3.0 * self.b)
    }

    pub fn psi0(&self, x: f64) -> f64 {
        (self.a + self.b * x * x).powf(self.exponent()) * (-self.epsilon * x * x / 6.0).exp()
    }

    pub fn psi1(&self, x: f64) -> f64 {
        (self.a * x + self.b * x.powi(3) / 3.0) * self.psi0(x)
    }
}

/// φ = ax + bx³/3 with exact derivatives.
pub fn phi_generator(a: f64, b: f64, scale_hint: f64) -> GeneratorFunction {
    GeneratorFunction::make_analytic(
        real_fn(move |x| a * x + b * x * x * x / 3.0),
        real_fn(move |x| a + b * x * x),
        real_fn(move |x| 2.0 * b * x),
        real_fn(move |_| 2.0 * b),
        scale_hint,
        format!("{a}x + {b}x^3/3"),
    )
}

pub fn poly_phi_model(p: PolyPhiParams) -> Result<QesModel> {
    build_poly_phi(p, Family::PolyPhi)
}

/// poly-phi at ε = 3b/2a.
pub fn poly_phi_ces_model(a: f64, b: f64) -> Result<QesModel> {
    build_poly_phi(PolyPhiParams::ces(a, b)?, Family::PolyPhiCes)
}

fn build_poly_phi(p: PolyPhiParams, family: Family) -> Result<QesModel> {
    let mut m = method_b_build(&p.generator(), p.epsilon)?;
    let params: Vec<(&str, f64)> = match family {
        Family::PolyPhiCes => vec![("a", p.a), ("b", p.b)],
        _ => vec![("a", p.a), ("b", p.b), ("epsilon", p.epsilon)],
    };
    m.provenance = family_provenance(family, &params);
    m.closed_form = Some(ClosedForm {
        v_minus: real_fn(move |x| p.v_minus(x)),
        v_plus: Some(real_fn(move |x| p.v_plus(x))),
        psi0: real_fn(move |x| p.psi0(x)),
        psi1: real_fn(move |x| p.psi1(x)),
    });
    Ok(m)
}

/// W₊ = A(sinh αx − sinh αx₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinhWplusParams {
    pub amplitude: f64,
    pub alpha: f64,
    pub x0: f64,
}

impl SinhWplusParams {
    pub fn new(amplitude: f64, alpha: f64, x0: f64) -> Result<Self> {
        positive("A", amplitude)?;
        positive("alpha", alpha)?;
        if !x0.is_finite() {
            return Err(Error::Parameter(format!("x0 must be finite (got {x0})")));
        }
        Ok(Self { amplitude, alpha, x0 })
    }

    pub fn generator(&self) -> GeneratorFunction {
        let Self { amplitude: a, alpha, x0 } = *self;
        let s0 = (alpha * x0).sinh();
        GeneratorFunction::make_analytic(
            real_fn(move |x| a * ((alpha * x).sinh() - s0)),
            real_fn(move |x| a * alpha * (alpha * x).cosh()),
            real_fn(move |x| a * alpha * alpha * (alpha * x).sinh()),
            real_fn(move |x| a * alpha.powi(3) * (alpha * x).cosh()),
            1.0 / alpha,
            format!("{a}(sinh({alpha}x) - sinh({alpha}·{x0}))"),
        )
    }

    /// Aα cosh(αx₀)/2.
    pub fn epsilon(&self) -> f64 {
        self.amplitude * self.alpha * (self.alpha * self.x0).cosh() / 2.0
    }
}

/// No closed form is attached; x₀ = 0 is the Razavy double well.
pub fn sinh_wplus_model(p: SinhWplusParams) -> Result<QesModel> {
    let mut m = method_a_build(&p.generator())?;
    m.provenance = family_provenance(Family::SinhWplus, &[("A", p.amplitude), ("alpha", p.alpha), ("x0", p.x0)]);
    Ok(m)
}

/// Energies E₀..E_{n_max} of V₋ at ε = 3b/2a, where V₊ is an oscillator
/// with ω = b/2a shifted by 5b/4a and E_{n}⁻ = E_{n−1}⁺.
pub fn ces_exact_spectrum(a: f64, b: f64, n_max: usize) -> Result<Vec<f64>> {
    positive("a", a)?;
    positive("b", b)?;
    let omega = b / (2.0 * a);
    let shift = 5.0 * b / (4.0 * a);
    let plus = |n: usize| omega * (n as f64 + 0.5) + shift;
    Ok((0..=n_max).map(|n| if n == 0 { 0.0 } else { plus(n - 1) }).collect())
}

/// Unnormalized H_n(√ω x)·exp(−ωx²/2) and its derivative.
pub fn hermite_gaussian(omega: f64, n: usize) -> (RealFn, RealFn) {
    let root = omega.sqrt();
    let hermite = move |xi: f64| -> (f64, f64) {
        // returns (H_n, H_{n−1})
        let (mut prev, mut cur) = (0.0, 1.0);
        for k in 0..n {
            let next = 2.0 * xi * cur - 2.0 * k as f64 * prev;
            prev = cur;
            cur = next;
        }
        (cur, prev)
    };
    let psi = real_fn(move |x| {
        let xi = root * x;
        hermite(xi).0 * (-0.5 * xi * xi).exp()
    });
    let dpsi = real_fn(move |x| {
        let xi = root * x;
        let (hn, hm) = hermite(xi);
        root * (2.0 * n as f64 * hm - xi * hn) * (-0.5 * xi * xi).exp()
    });
    (psi, dpsi)
}

/// ψₙ⁻ for n ≥ 1 at ε = 3b/2a: B⁺ applied to the (n−1)-th oscillator
/// state of V₊.
pub fn ces_excited_states(a: f64, b: f64, n: usize) -> Result<Eigenstate> {
    if n == 0 {
        return Err(Error::Parameter("n = 0 is the zero mode; use ground_state_minus".into()));
    }
    let model = poly_phi_ces_model(a, b)?;
    let energies = ces_exact_spectrum(a, b, n)?;
    let (psi, dpsi) = hermite_gaussian(b / (2.0 * a), n - 1);
    let mut state = apply_raising(&model.w, psi, dpsi, energies[n])?;
    state.node_count = Some(n);
    Ok(state)
}

/// Built-in family names as used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PolyWplus,
    PolyPhi,
    PolyPhiCes,
    SinhWplus,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::PolyWplus, Family::PolyPhi, Family::PolyPhiCes, Family::SinhWplus];

    pub fn name(self) -> &'static str {
        match self {
            Family::PolyWplus => "poly-wplus",
            Family::PolyPhi => "poly-phi",
            Family::PolyPhiCes => "poly-phi-ces",
            Family::SinhWplus => "sinh-wplus",
        }
    }

    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            Family::PolyWplus | Family::PolyPhiCes => &["a", "b"],
            Family::PolyPhi => &["a", "b", "epsilon"],
            Family::SinhWplus => &["A", "alpha", "x0"],
        }
    }

    pub fn defaults(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Family::PolyWplus => &[("a", 2.0), ("b", 1.0)],
            Family::PolyPhi => &[("a", 1.0), ("b", 1.0), ("epsilon", 1.0)],
            Family::PolyPhiCes => &[("a", 1.0), ("b", 1.0)],
            Family::SinhWplus => &[("A", 1.0), ("alpha", 1.0), ("x0", 0.0)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// True for families generated from φ (Method B).
    pub fn is_phi_based(self) -> bool {
        matches!(self, Family::PolyPhi | Family::PolyPhiCes)
    }

    pub fn build(self, params: &BTreeMap<String, f64>) -> Result<QesModel> {
        let get = |k: &str| {
            params.get(k).copied().ok_or_else(|| Error::Parameter(format!("missing parameter '{k}' for {}", self.name())))
        };
        match self {
            Family::PolyWplus => poly_wplus_model(PolyWplusParams::new(get("a")?, get("b")?)?),
            Family::PolyPhi => poly_phi_model(PolyPhiParams::new(get("a")?, get("b")?, get("epsilon")?)?),
            Family::PolyPhiCes => poly_phi_ces_model(get("a")?, get("b")?),
            Family::SinhWplus => sinh_wplus_model(SinhWplusParams::new(get("A")?, get("alpha")?, get("x0")?)?),
        }
    }

    /// φ generator and ε for the φ-based families.
    pub fn phi(self, params: &BTreeMap<String, f64>) -> Result<(GeneratorFunction, f64)> {
        let get = |k: &str| {
            params.get(k).copied().ok_or_else(|| Error::Parameter(format!("missing parameter '{k}' for {}", self.name())))
        };
        let p = match self {
            Family::PolyPhi => PolyPhiParams::new(get("a")?, get("b")?, get("epsilon")?)?,
            Family::PolyPhiCes => PolyPhiParams::ces(get("a")?, get("b")?)?,
            _ => return Err(Error::Parameter("crosscheck requires a φ-based family".into())),
        };
        Ok((p.generator(), p.epsilon))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown family '{s}'")))
    }
}

fn family_provenance(family: Family, params: &[(&str, f64)]) -> Provenance {
    Provenance::Family {
        name: family.name().into(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::normalized_difference;

    #[test]
    fn parameter_validation() {
        assert_eq!(PolyWplusParams::new(2.0, -1.0).unwrap_err().to_string(), "b must be > 0 (got -1)");
        assert!(PolyPhiParams::new(1.0, 1.0, 0.0).is_err());
        assert!(SinhWplusParams::new(1.0, 0.0, 0.0).is_err());
        assert!(SinhWplusParams::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn poly_wplus_energies_and_origin_value() {
        let m = poly_wplus_model(PolyWplusParams::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.psi0.energy, 0.0);
        assert_eq!(m.epsilon, 1.0);
        let p = PolyWplusParams::new(2.0, 1.0).unwrap();
        // the closed form has 0/0-free terms at the origin
        assert!((p.v_minus(0.0) + 0.125).abs() < 1e-15);
        for b in [0.5, 3.0] {
            let m = poly_wplus_model(PolyWplusParams::new(2.0, b).unwrap()).unwrap();
            assert_eq!(m.epsilon, 1.0);
        }
    }

    #[test]
    fn poly_wplus_generic_matches_closed_form() {
        for (a, b) in [(2.0, 1.0), (1.0, 0.3), (0.5, 2.0)] {
            let p = PolyWplusParams::new(a, b).unwrap();
            let m = poly_wplus_model(p).unwrap();
            let cf = m.closed_form.as_ref().unwrap();
            for x in m.probe_grid() {
                let (g, c) = (m.v_minus(x), (cf.v_minus)(x));
                assert!((g - c).abs() <= 1e-10 * c.abs().max(1.0), "a={a} b={b} x={x}: {g} vs {c}");
            }
            let grid = m.probe_grid();
            assert!(normalized_difference(&grid, &m.psi0.psi, &cf.psi0) < 1e-10);
            let d1 = normalized_difference(&grid, &m.psi1.psi, &cf.psi1);
            assert!(d1 < 1e-10, "a={a} b={b}: {d1}");
        }
    }

    #[test]
    fn small_b_approaches_oscillator() {
        let m = poly_wplus_model(PolyWplusParams::new(2.0, 1e-12).unwrap()).unwrap();
        assert_eq!(m.epsilon, 1.0);
        for x in [-3.0, 0.0, 1.2] {
            // a²x²/8 − a/4 with a = 2
            assert!((m.v_minus(x) - (0.5 * x * x - 0.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn poly_phi_coefficients() {
        let p = PolyPhiParams::new(1.0, 1.0, 1.0).unwrap();
        assert!((p.a_minus - 1.0 / 9.0).abs() < 1e-16);
        assert!((p.b_minus - 5.0 / 3.0).abs() < 1e-15);
        assert!((p.r_minus - 7.0 / 18.0).abs() < 1e-15);
        assert!((p.d_minus + 55.0 / 18.0).abs() < 1e-15);
        assert!((p.d_plus - 5.0 / 18.0).abs() < 1e-15);
        assert_eq!(p.a_minus, p.a_plus);
        assert!((p.r_plus - p.r_minus - 1.0 / 3.0).abs() < 1e-15);
        let ces = PolyPhiParams::new(1.0, 1.0, 1.5).unwrap();
        assert_eq!(ces.d_plus, 0.0);
    }

    #[test]
    fn poly_phi_generic_matches_closed_form() {
        for (a, b, e) in [(1.0, 1.0, 1.0), (2.0, 0.5, 0.7), (0.8, 1.3, 2.2)] {
            let p = PolyPhiParams::new(a, b, e).unwrap();
            let m = poly_phi_model(p).unwrap();
            for x in m.probe_grid() {
                let w = m.w.wprime(x);
                assert!((m.v_minus(x) - p.v_minus(x)).abs() <= 1e-10 * p.v_minus(x).abs().max(1.0));
                assert!((m.v_plus(x) - p.v_plus(x)).abs() <= 1e-10 * p.v_plus(x).abs().max(1.0));
                assert!((p.v_plus(x) - p.v_minus(x) - w).abs() < 1e-12);
            }
            let cf = m.closed_form.as_ref().unwrap();
            let grid = m.probe_grid();
            assert!(normalized_difference(&grid, &m.psi0.psi, &cf.psi0) < 1e-10);
            let d1 = normalized_difference(&grid, &m.psi1.psi, &cf.psi1);
            assert!(d1 < 1e-10, "a={a} b={b}: {d1}");
        }
    }

    #[test]
    fn ces_partner_is_shifted_oscillator() {
        let (a, b) = (1.3, 0.8);
        let m = poly_phi_ces_model(a, b).unwrap();
        assert!((m.epsilon - 1.5 * b / a).abs() < 1e-15);
        for x in [-4.0, -1.0, 0.0, 0.5, 3.0] {
            let ho = b * b / (8.0 * a * a) * x * x + 5.0 * b / (4.0 * a);
            assert!((m.v_plus(x) - ho).abs() < 1e-13);
            // W₁ is the oscillator superpotential εx/3
            assert!((m.w1.w(x) - m.epsilon * x / 3.0).abs() < 1e-14);
            let d = a + b * x * x;
            let vm = b * b / (8.0 * a * a) * x * x + 2.0 * b / d - 4.0 * a * b / (d * d) + 3.0 * b / (4.0 * a);
            assert!((m.v_minus(x) - vm).abs() < 1e-13);
        }
    }

    #[test]
    fn ces_ladder() {
        let e = ces_exact_spectrum(1.0, 1.0, 5).unwrap();
        assert_eq!(e, vec![0.0, 1.5, 2.0, 2.5, 3.0, 3.5]);
        for (a, b) in [(2.0, 1.0), (0.7, 1.9)] {
            let e = ces_exact_spectrum(a, b, 6).unwrap();
            for n in 1..=6 {
                assert!((e[n] - (b / a) * (n as f64 / 2.0 + 1.0)).abs() < 1e-14);
            }
            assert!((e[1] - 1.5 * b / a).abs() < 1e-15);
        }
        assert_eq!(ces_exact_spectrum(2.0, 1.0, 1).unwrap()[1], 0.75);
    }

    #[test]
    fn sinh_epsilon() {
        let cases = [((1.0, 1.0, 0.0), 0.5), ((1.0, 1.0, 1.0), 1f64.cosh() / 2.0), ((2.0, 1.0, 0.0), 1.0)];
        for ((a, al, x0), eps) in cases {
            let p = SinhWplusParams::new(a, al, x0).unwrap();
            assert_eq!(p.epsilon(), eps);
            let m = sinh_wplus_model(p).unwrap();
            assert!((m.epsilon - eps).abs() < 1e-14);
        }
        assert!((1f64.cosh() / 2.0 - 0.77154).abs() < 1e-5);
    }

    #[test]
    fn hermite_gaussians_solve_the_oscillator() {
        let omega = 0.5;
        for n in 0..5 {
            let (psi, dpsi) = hermite_gaussian(omega, n);
            for x in [-2.0, 0.3, 1.7] {
                let h = 1e-4;
                let second = (dpsi(x + h) - dpsi(x - h)) / (2.0 * h);
                let lhs = -0.5 * second + 0.5 * omega * omega * x * x * psi(x);
                assert!((lhs - omega * (n as f64 + 0.5) * psi(x)).abs() < 1e-6, "n={n}");
            }
        }
    }

    #[test]
    fn family_registry() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            let m = f.build(&f.defaults()).unwrap();
            assert!(m.epsilon > 0.0);
        }
        assert!("custom".parse::<Family>().is_err());
        let err = Family::PolyWplus.phi(&Family::PolyWplus.defaults()).unwrap_err();
        assert!(err.to_string().contains("crosscheck requires a φ-based family"));
    }
}
