use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller supplied an inconsistent combination of inputs.
    #[error("usage error: {0}")]
    Usage(String),

    /// The tridiagonal eigen-iteration failed to converge.
    #[error("eigenvalue iteration did not converge at index {index}")]
    EigenNoConvergence { index: usize },

    /// Two eigenvalues coincide, which cannot happen for a Jacobi matrix.
    #[error("eigenvalues {index} and {} coincide at {value}", index + 1)]
    CoincidentNodes { index: usize, value: f64 },

    /// A non-finite value showed up at a quadrature or sample node.
    #[error("non-finite value at node {index} (x = {x})")]
    NonFinite { index: usize, x: f64 },

    /// Newton refinement in extended precision did not converge.
    #[error("extended-precision Newton iteration did not converge at node {index}")]
    OracleNoConvergence { index: usize },

    /// A factorization met a non-positive pivot.
    #[error("matrix is not positive definite (pivot {index} = {pivot})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// Failure that indicates a broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
