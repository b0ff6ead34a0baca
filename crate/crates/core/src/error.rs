use alloc::string::String;

/// Errors raised by the statistics, generators and efficiency formulas.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("invalid lag window: H = {lags} is not admissible for n = {n}")]
    InvalidLag { lags: usize, n: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("explosive model: spectral radius estimate {0:.4} is not below 1")]
    Explosive(f64),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("undefined moment: {0}")]
    UndefinedMoment(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
