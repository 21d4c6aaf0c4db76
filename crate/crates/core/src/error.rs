use thiserror::Error;

use crate::dsl::ParseError;

/// Failures of the adaptive integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    /// Refinement kept an endpoint contribution from shrinking; the integral is
    /// treated as non-integrable. `lower_bound` is the partial sum reached.
    #[error("integral diverged (partial estimate {lower_bound:e} after {evaluations} evaluations)")]
    Diverged { lower_bound: f64, evaluations: u64 },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid quadrature configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponents out of range: {0}")]
    InvalidExponents(String),
    #[error("point outside the open disc: {0}")]
    Domain(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("schedule overflow: {0}")]
    Overflow(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("fit unreliable: residual {residual:.3} exceeds {limit}")]
    FitUnreliable { residual: f64, limit: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
