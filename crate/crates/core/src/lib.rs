//! Supersymmetric construction of quasi-exactly solvable one-dimensional
//! potentials with two known eigenstates, plus an independent
//! finite-difference verifier.
//!
//! Units: ħ = m = 1, H = −½ d²/dx² + V.

pub mod constructors;
pub mod error;
pub mod expr;
pub mod families;
pub mod funcspace;
pub mod susy;
pub mod verify;

pub use constructors::{cross_check_methods, method_a_build, method_b_build, QesModel};
pub use error::{Error, Result};
pub use funcspace::{GeneratorFunction, RealFn};
pub use verify::{verify_model, Grid, SpectralReport, Tolerances};
