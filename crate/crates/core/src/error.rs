use thiserror::Error;

/// Errors raised while building or verifying a QES model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite integrand value {value} at x = {x}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error("broken SUSY: zero mode not normalizable ({0})")]
    BrokenSusy(String),

    #[error("cannot raise zero mode: energy {0} is not positive")]
    ZeroModeRaise(f64),

    #[error("sign condition violated: {0}")]
    SignCondition(String),

    #[error("W₊ has multiple zeros: not supported ({count} sign changes)")]
    MultipleZeros { count: usize },

    #[error("non-transversal or wrongly oriented zero at x0 = {x0} (derivative {slope})")]
    BadZero { x0: f64, slope: f64 },

    #[error("inadmissible construction: {0}")]
    Inadmissible(String),

    #[error("φ not monotonically increasing: φ′({x}) = {slope}")]
    NotMonotone { x: f64, slope: f64 },

    #[error("{0}")]
    Parameter(String),

    #[error("grid: {0}")]
    Grid(String),

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("expression: {0}")]
    Expression(String),
}

pub type Result<T> = std::result::Result<T, Error>;
