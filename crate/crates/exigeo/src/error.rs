use thiserror::Error;

pub type Result<T> = std::result::Result<T, ExigeoError>;

/// Toolkit-wide error type. Validation errors come from bad inputs or
/// out-of-range requests; numerical errors from solver or quadrature failure.
#[derive(Error, Debug)]
pub enum ExigeoError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ExigeoError {
    pub fn validation(msg: impl Into<String>) -> Self {
        ExigeoError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        ExigeoError::Numerical(msg.into())
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, ExigeoError::Validation(_))
    }
}
