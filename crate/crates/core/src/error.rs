use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sample count {0}: must be even and at least 4")]
    InvalidSampleCount(usize),
    #[error("expected a real-valued circle function (max |imag| = {max_imag:e})")]
    NotReal { max_imag: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("point |zeta| = {modulus} is too close to the unit circle")]
    TooCloseToBoundary { modulus: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("iteration diverged after {iterations} iterations (last residual {last_residual:e})")]
    Divergence {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },
    #[error("iterate left the working box at iteration {iteration} (sup modulus {modulus})")]
    DomainEscape { iteration: usize, modulus: f64 },
    #[error("degenerate boundary: gradient vanishes at {0}")]
    DegenerateBoundary(String),
    #[error("degenerate differential (norm {0:e})")]
    DegenerateDifferential(f64),
    #[error("singular jacobian (smallest singular value {0:e})")]
    Singular(f64),
    #[error("distance minimization did not converge")]
    NoConvergence,
    #[error("hypothesis check failed: {reason}")]
    Hypothesis {
        reason: String,
        witnesses: Vec<Vec<f64>>,
    },
    #[error("properness violation: image leaves the target domain ({0} points)")]
    Properness(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
