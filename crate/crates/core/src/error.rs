use thiserror::Error;

pub type Result<T, E = CrnError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrnError {
    /// An input lies outside the domain of the operation (e.g. a nonpositive
    /// concentration passed to a logarithm).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Malformed network or map file. `field` names the offending JSON path.
    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("singular map: {0}")]
    Singular(String),

    #[error("tree constants undefined: linkage class {class:?} is not strongly connected")]
    TreeConstantsUndefined { class: Vec<usize> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("system is not complex-balanced")]
    NotBalanced,
}

impl CrnError {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        CrnError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
