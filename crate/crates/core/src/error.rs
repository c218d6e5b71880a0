use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method or quadrature failed to reach its tolerance.
    #[error("no convergence: {what} (after {iterations} iterations, last estimate {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    /// A constructed object violates an invariant it is supposed to satisfy.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// The Newton iteration of the sphere solver gave up.
    #[error("diverged after {iterations} iterations (residual {residual:e}, condition estimate {condition:e})")]
    Diverged {
        iterations: usize,
        residual: f64,
        condition: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// A file could be read but its content is not what was expected.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
