use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum KurError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate steady state: second-smallest singular value {sigma:.3e} below {threshold:.3e}")]
    DegenerateSteadyState { sigma: f64, threshold: f64 },
    #[error("no stationary state: smallest singular value {sigma:.3e} above {threshold:.3e}")]
    NoStationaryState { sigma: f64, threshold: f64 },
    #[error("numerical inconsistency in {quantity}: imaginary residual {residual:.3e}")]
    NumericalInconsistency { quantity: &'static str, residual: f64 },
    #[error("psi undefined: |J| = {current:.3e} is below threshold")]
    UndefinedPsi { current: f64 },
    #[error("counting-field oracle failed: {0}")]
    OracleFailure(String),
    #[error("network sampling exhausted {attempts} attempts")]
    RetryBudgetExhausted { attempts: u32 },
}

pub type Result<T> = std::result::Result<T, KurError>;

pub(crate) fn invalid(msg: impl Into<String>) -> KurError {
    KurError::InvalidInput(msg.into())
}
