use thiserror::Error;

/// Errors raised by the library. Variants follow the failure classes of the
/// public operations: bad inputs, unmet preconditions and exhausted searches.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point is not a valid element of its space.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An input violates a stated precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The operation does not apply to this space or map.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Iterating a map produced an invalid point.
    #[error("invalid point at step {step}: {reason}")]
    InvalidOrbitPoint { step: usize, reason: String },

    /// No record time was found within the horizon.
    #[error("no record time found within horizon {horizon}")]
    HorizonExhausted { horizon: usize },

    /// A limit classification was requested without a declared limit.
    #[error("limit behaviour was not declared; refusing to infer it")]
    UndeclaredLimit,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn parameter(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
