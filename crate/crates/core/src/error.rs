use thiserror::Error;

pub type Result<T> = std::result::Result<T, LargeError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LargeError {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("degenerate column {0}: zero variance")]
    DegenerateColumn(usize),

    #[error("data matrix must be column-centered")]
    NotCentered,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular design")]
    SingularDesign,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("lost positive definiteness")]
    LostPositiveDefiniteness,

    #[error("undefined denominator: true precision matrix has no off-diagonal entries")]
    UndefinedDenominator,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

impl LargeError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LargeError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
