//! Superpotentials, partner potentials V± = ½(W² ± W′), zero modes, and the
//! raising map B⁺ between the partner Hamiltonians.
//!
//! Units are fixed to ħ = m = 1 with H = −½ d²/dx² + V.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{cumulative_integral, real_fn, CumulativeIntegral, QuadratureSpec, RealFn};

/// A superpotential W with its derivative and cumulative integral.
#[derive(Clone)]
pub struct Superpotential {
    w: RealFn,
    wprime: RealFn,
    integral: Arc<CumulativeIntegral>,
    scale_hint: f64,
    label: String,
}

impl fmt::Debug for Superpotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superpotential")
            .field("label", &self.label)
            .field("base_point", &self.integral.base_point())
            .field("scale_hint", &self.scale_hint)
            .finish()
    }
}

impl Superpotential {
    /// `base_point` anchors ∫W dx; `scale_hint` sets quadrature panels and
    /// the default asymptotic probe radius.
    pub fn new(w: RealFn, wprime: RealFn, base_point: f64, scale_hint: f64, label: impl Into<String>) -> Self {
        let integral = cumulative_integral(w.clone(), base_point, QuadratureSpec::for_scale(scale_hint));
        Self { w, wprime, integral: Arc::new(integral), scale_hint, label: label.into() }
    }

    pub fn w(&self, x: f64) -> f64 {
        (self.w)(x)
    }

    pub fn wprime(&self, x: f64) -> f64 {
        (self.wprime)(x)
    }

    pub fn integral(&self) -> &CumulativeIntegral {
        &self.integral
    }

    pub fn w_fn(&self) -> RealFn {
        self.w.clone()
    }

    pub fn wprime_fn(&self) -> RealFn {
        self.wprime.clone()
    }

    pub fn scale_hint(&self) -> f64 {
        self.scale_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `|base_point| + 5·scale_hint`.
    pub fn default_probe_radius(&self) -> f64 {
        self.integral.base_point().abs() + 5.0 * self.scale_hint
    }
}

/// V₋ and V₊ generated by one superpotential.
#[derive(Debug, Clone)]
pub struct PotentialPair {
    source: Superpotential,
}

impl PotentialPair {
    pub fn v_minus(&self, x: f64) -> f64 {
        let w = self.source.w(x);
        0.5 * (w * w - self.source.wprime(x))
    }

    pub fn v_plus(&self, x: f64) -> f64 {
        let w = self.source.w(x);
        0.5 * (w * w + self.source.wprime(x))
    }

    pub fn source(&self) -> &Superpotential {
        &self.source
    }

    pub fn v_minus_fn(&self) -> RealFn {
        let p = self.clone();
        real_fn(move |x| p.v_minus(x))
    }

    pub fn v_plus_fn(&self) -> RealFn {
        let p = self.clone();
        real_fn(move |x| p.v_plus(x))
    }
}

pub fn pair_potentials(w: &Superpotential) -> PotentialPair {
    PotentialPair { source: w.clone() }
}

/// An unnormalized eigenfunction with its claimed energy.
#[derive(Clone)]
pub struct Eigenstate {
    pub energy: f64,
    pub psi: RealFn,
    pub psi_prime: Option<RealFn>,
    /// Filled in on demand by the verifier; `None` means unnormalized.
    pub norm_constant: Option<f64>,
    pub node_count: Option<usize>,
}

impl fmt::Debug for Eigenstate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Eigenstate")
            .field("energy", &self.energy)
            .field("norm_constant", &self.norm_constant)
            .field("node_count", &self.node_count)
            .finish()
    }
}

impl Eigenstate {
    pub fn psi(&self, x: f64) -> f64 {
        (self.psi)(x)
    }
}

/// Outcome of the finite-sample asymptotic sign test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCheck {
    pub passed: bool,
    /// (x, W(x)) pairs that were probed.
    pub samples: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Probes W at ±r·{1, 2, 4}. Passes iff W(4r) > 0 and W(−4r) < 0; a wrong
/// sign at the inner radii or a non-monotone |W| only produces a warning.
pub fn check_sign_condition(w: &Superpotential, probe_radius: f64) -> SignCheck {
    let mut warnings = Vec::new();
    if probe_radius < 5.0 * w.scale_hint() {
        warnings.push(format!(
            "probe radius {probe_radius} is below 5·scale_hint = {}",
            5.0 * w.scale_hint()
        ));
    }
    let radii = [probe_radius, 2.0 * probe_radius, 4.0 * probe_radius];
    let right: Vec<(f64, f64)> = radii.iter().map(|&r| (r, w.w(r))).collect();
    let left: Vec<(f64, f64)> = radii.iter().map(|&r| (-r, w.w(-r))).collect();
    let passed = right[2].1 > 0.0 && left[2].1 < 0.0;
    if right[..2].iter().any(|&(_, v)| v <= 0.0) || left[..2].iter().any(|&(_, v)| v >= 0.0) {
        warnings.push("sign pattern only established at the outermost probe radius".into());
    }
    for side in [&right, &left] {
        if side.windows(2).any(|p| p[1].1.abs() < p[0].1.abs()) {
            warnings.push(format!("|W| decreases outward near x = {}", side[0].0));
        }
    }
    let mut samples = left;
    samples.reverse();
    samples.extend(right);
    SignCheck { passed, samples, warnings }
}

/// ψ₀⁻ = exp(−∫W dx) at energy 0.
pub fn ground_state_minus(w: &Superpotential) -> Result<Eigenstate> {
    let check = check_sign_condition(w, w.default_probe_radius());
    if !check.passed {
        return Err(Error::BrokenSusy(format!("W samples {:?}", check.samples)));
    }
    let integral = w.integral.clone();
    let wfn = w.w.clone();
    let psi = real_fn(move |x| (-integral.value(x)).exp());
    let psi_for_prime = psi.clone();
    let psi_prime = real_fn(move |x| -wfn(x) * psi_for_prime(x));
    Ok(Eigenstate { energy: 0.0, psi, psi_prime: Some(psi_prime), norm_constant: None, node_count: Some(0) })
}

/// ψ⁻ = B⁺ψ⁺/√E = (−ψ′ + Wψ)/√(2E) for an H₊ eigenstate ψ⁺ at energy E > 0.
///
/// The derivative of the result uses ψ″ = 2(V₊ − E)ψ, so `psi` must be an
/// eigenfunction of H₊ built from the same W.
pub fn apply_raising(w: &Superpotential, psi: RealFn, psi_prime: RealFn, energy_plus: f64) -> Result<Eigenstate> {
    if !(energy_plus > 0.0) {
        return Err(Error::ZeroModeRaise(energy_plus));
    }
    let norm = (2.0 * energy_plus).sqrt();
    let (wf, wp) = (w.w.clone(), w.wprime.clone());
    let (p, dp) = (psi.clone(), psi_prime.clone());
    let out = real_fn(move |x| (-dp(x) + wf(x) * p(x)) / norm);
    let (wf, wp2) = (w.w.clone(), wp);
    let out_prime = real_fn(move |x| {
        let wv = wf(x);
        let v_plus = 0.5 * (wv * wv + wp2(x));
        let p = psi(x);
        let pp = 2.0 * (v_plus - energy_plus) * p;
        (-pp + wp2(x) * p + wv * psi_prime(x)) / norm
    });
    Ok(Eigenstate { energy: energy_plus, psi: out, psi_prime: Some(out_prime), norm_constant: None, node_count: None })
}

/// W² + W′ − W₁² + W₁′ − 2ε; zero for a consistent pair.
pub fn riccati_residual(w: &Superpotential, w1: &Superpotential, epsilon: f64, x: f64) -> f64 {
    let a = w.w(x);
    let b = w1.w(x);
    a * a + w.wprime(x) - b * b + w1.wprime(x) - 2.0 * epsilon
}

/// Residual divided by the magnitude of its terms (floored at 1).
pub fn riccati_residual_scaled(w: &Superpotential, w1: &Superpotential, epsilon: f64, x: f64) -> f64 {
    let a = w.w(x);
    let b = w1.w(x);
    let scale = (a * a + w.wprime(x).abs() + b * b + w1.wprime(x).abs() + 2.0 * epsilon.abs()).max(1.0);
    riccati_residual(w, w1, epsilon, x).abs() / scale
}
