use thiserror::Error;

/// Errors raised by state operations, formulas and simulation setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no atoms left to detect")]
    NoAtoms,
    #[error("operation produced a state with zero norm")]
    ZeroNorm,
    #[error("amplitude sequence must be non-empty")]
    EmptyState,
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}
