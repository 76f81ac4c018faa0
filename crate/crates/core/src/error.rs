use thiserror::Error;

/// Errors produced anywhere in the discretization, solver and I/O pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("result underflows the normal f64 range: {0}")]
    Underflow(String),

    #[error("quadrature tolerance {tolerance:e} not met (estimate {estimate:e}, error {error:e})")]
    ToleranceNotMet {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("series or continued fraction did not converge: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: expected {expected:?}, got {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("dense evaluation needs {requested} unknowns, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("grids are not nested: N = {coarse} does not divide N_ref = {reference}")]
    NonNested { coarse: usize, reference: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short stable identifier, used for machine readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Underflow(_) => "underflow",
            Error::ToleranceNotMet { .. } => "tolerance_not_met",
            Error::NoConvergence(_) => "no_convergence",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::NotConverged { .. } => "not_converged",
            Error::NonNested { .. } => "non_nested",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
