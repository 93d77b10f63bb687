use thiserror::Error;

/// Errors raised by riskcal operations.
#[derive(Debug, Error)]
pub enum RiskError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("unbounded result: {0}")]
    Unbounded(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RiskError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(RiskError::Domain(msg.into()))
}

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(RiskError::Validation(msg.into()))
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(RiskError::Input(msg.into()))
}
