use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series ran out of terms before meeting its stopping rule.
    #[error("series did not converge after {terms} terms (partial sum {partial:e})")]
    Convergence { terms: usize, partial: f64 },

    /// A recursion produced non-finite coefficients.
    #[error("recursion diverged at n = {n}")]
    Divergence { n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
