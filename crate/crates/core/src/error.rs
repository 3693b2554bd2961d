use thiserror::Error;

/// Errors raised while building or solving an HDG discretization.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HdgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature exactness {requested} (maximum {max})")]
    UnsupportedDegree { requested: usize, max: usize },

    #[error(
        "stabilization violates tau1 - beta.n/2 > 0 on element {element} (minimum {min_value:.3e})"
    )]
    StabilizationInvalid { element: usize, min_value: f64 },

    #[error("local system on element {element} is numerically singular (rcond {rcond:.3e})")]
    LocalSingularity { element: usize, rcond: f64 },

    #[error("global trace solve failed: {reason} (relative residual {residual:.3e})")]
    SolverFailure { reason: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, HdgError>;
