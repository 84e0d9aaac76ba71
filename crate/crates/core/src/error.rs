use thiserror::Error;

/// Failures raised by the library. Verification shortfalls that are part of a
/// report (cocycle violations, c-flat failures) are returned as data instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("simplex {0:?} is not in the complex")]
    NotASimplex(Vec<usize>),

    #[error("vertex {0} is not in the complex")]
    UnknownVertex(usize),

    #[error("complex is disconnected")]
    Disconnected,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid witness at move {index}: {reason}")]
    InvalidWitness { index: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what}: value {value:.6e} exceeds threshold {limit:.6e}")]
    Threshold {
        what: String,
        value: f64,
        limit: f64,
    },

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("flux of face {face:?} is {flux:.6} which is too close to the branch cut")]
    AmbiguousFlux { face: Vec<usize>, flux: f64 },

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
