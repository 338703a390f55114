use thiserror::Error;

/// Errors raised by the series, product, sum and catalog layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series has no invertible leading coefficient")]
    NotInvertible,
    #[error("inverse of a non-monomial exact series needs a finite truncation order")]
    UnboundedOrder,
    #[error("requested order {requested} exceeds available order {available}")]
    OrderExceeded {
        requested: String,
        available: String,
    },
    #[error("substitution exponent must be positive, got {0}")]
    InvalidSubstitution(String),
    #[error("divergent product: {0}")]
    DivergentProduct(String),
    #[error("theta sum needs a positive quadratic coefficient, got {0}")]
    DivergentTheta(String),
    #[error("divergent sum: {0}")]
    DivergentSpec(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("non-integer product exponent {value} at index {index}")]
    NotAProduct { index: usize, value: String },
    #[error("exponent profile has length {have}, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("sum and product disagree: {0}")]
    NotAnIdentity(String),
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },
    #[error("duplicate catalog id {0}")]
    DuplicateId(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
