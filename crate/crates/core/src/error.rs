use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative weight {value} at direction {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("simplex point must have 2d+1 >= 3 entries, got {0}")]
    InvalidLength(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid exponent {0}: l_p norms need p >= 1")]
    InvalidExponent(f64),
    #[error("invalid law specification: {0}")]
    InvalidSpec(String),
    #[error("degenerate site {index}: ellipticity constant is zero")]
    DegenerateSite { index: usize },
    #[error("kernel is not irreducible")]
    NotIrreducible,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point {0:?} is not in the interior of the domain")]
    OutOfDomain(Vec<i64>),
    #[error("site {0:?} has zero ellipticity constant but positive source")]
    NotElliptic(Vec<i64>),
    #[error("singular linear system (pivot {pivot} is zero)")]
    SingularSystem { pivot: usize },
    #[error("density is not stationary for the kernel (residual {residual:e})")]
    DensityMismatch { residual: f64 },
    #[error("state space too large for a direct solve: {0} states")]
    TooLarge(usize),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
