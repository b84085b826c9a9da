use thiserror::Error;

/// Failures reported by the evaluation routines.
///
/// Non-convergence of a series is not an error: it is reported through
/// [`EvalResult::converged`](crate::EvalResult).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("divergent series: {0}")]
    DivergentSeries(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// True when `v` is zero or a negative integer.
pub(crate) fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}
