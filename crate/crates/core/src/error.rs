use thiserror::Error;

/// Errors raised while building discretizations, solving pencils, or fitting
/// dispersion data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid continuity k={k} for degree p={p}: need 0 <= k <= p-1")]
    InvalidContinuity { p: usize, k: usize },

    #[error("invalid degree p={0}: need p >= 1")]
    InvalidDegree(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid quadrature point count m={m} for {rule}")]
    InvalidPointCount { rule: &'static str, m: usize },

    #[error("point x={0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("{rule} node iteration did not converge for m={m}")]
    QuadratureNonConvergence { rule: &'static str, m: usize },

    #[error("blended mass matrix is not positive definite for tau={tau}")]
    IndefiniteBlend { tau: f64 },

    #[error("mass matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("pencil dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("2D operator size {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("inner product for mode {mode} failed the quadrature refinement check (change {change:e})")]
    InnerProductRefinement { mode: usize, change: f64 },

    #[error("degenerate convergence fit: {0}")]
    DegenerateFit(String),

    #[error("inconclusive leading-coefficient fit: spread {spread:.3} exceeds {limit:.3}")]
    InconclusiveFit { spread: f64, limit: f64 },

    #[error("no sign change of the objective in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::IndefiniteBlend { .. }
                | Error::NotPositiveDefinite
                | Error::EigenFailure(_)
                | Error::InnerProductRefinement { .. }
                | Error::DegenerateFit(_)
                | Error::InconclusiveFit { .. }
                | Error::NoRoot { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
