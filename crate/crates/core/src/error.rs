use thiserror::Error;

/// Errors raised by the geometric and spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point is numerically on (or beyond) the sphere at infinity.
    #[error("point at infinity: |x| = {norm} (limit {limit})")]
    AtInfinity { norm: f64, limit: f64 },

    /// Sampled data is not resolved by the requested band limit.
    #[error("under-resolved input: round-trip residual {residual:.3e} exceeds {tolerance:.1e}")]
    UnderResolved { residual: f64, tolerance: f64 },

    /// The surface is not horospherically convex.
    #[error("surface is not horospherically convex (margin {margin:.6e})")]
    NotHConvex { margin: f64 },

    /// A precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative method or limit estimate did not converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
