use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The input violates a structural invariant (bad index, stem on the wrong color, ...).
    #[error("structural error: {0}")]
    Structural(String),
    /// A parameter is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exhaustive search or a random growth exceeded its budget.
    #[error("resource budget exceeded: {what} (seed {seed:?})")]
    Resource { what: String, seed: Option<u64> },
    /// More of an infinite object must be realized before the query can be answered.
    #[error("needs deepening: {0}")]
    NeedsDeepening(String),
    /// The operation requires a complete map but frontier half-edges are present.
    #[error("partial map: {0}")]
    PartialMap(String),
    /// Two routes that must agree did not; signals a bug, not bad input.
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("unknown format: {0}")]
    UnknownFormat(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
