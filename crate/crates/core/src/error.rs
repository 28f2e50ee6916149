use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An iterative method ran out of budget. Carries the best estimate so far.
    #[error("{method} did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Convergence {
        method: &'static str,
        estimate: f64,
        error_bound: f64,
    },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
