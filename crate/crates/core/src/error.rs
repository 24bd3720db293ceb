use thiserror::Error;

/// Errors raised across the library.
///
/// Solver outcomes that are not failures (infeasible LPs, iteration limits)
/// are reported through status enums on the result types instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical constraint (rotation limit, modulus) was violated.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// Invalid numerical domain for an otherwise well-formed call.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad configuration value. `field` names the offending entry.
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Mismatched dimensions or non-Hermitian input to a kernel.
    #[error("structural error: {0}")]
    Structure(String),

    /// A solver failed in a way the caller cannot recover from.
    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
