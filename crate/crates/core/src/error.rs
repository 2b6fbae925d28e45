use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A user-facing input failed validation. `field` names the offending
    /// parameter (a CLI flag name where one exists).
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("argument outside the domain of {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    #[error("operation unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("selection is empty: no active variables")]
    NoSelection,

    #[error("inconsistent selection event: {0}")]
    Inconsistent(String),

    #[error("sign enumeration over {size} active variables exceeds the limit of {limit}")]
    EnumerationTooLarge { size: usize, limit: usize },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
