use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("amplitude vector has no nonzero entry")]
    ZeroVector,

    #[error("amplitude at index {index} is {value}; amplitudes must be finite and nonnegative")]
    InvalidAmplitude { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("circuit has {wires} wires, above the simulation cap of {cap}")]
    WireCapExceeded { wires: usize, cap: usize },

    #[error("unknown wire `{0}`")]
    UnknownWire(String),

    #[error("initial state has no overlap with the target")]
    NoOverlap,

    #[error("runtime bound precondition violated: x = {x:.6} is not below 1/2")]
    BoundInvalid { x: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bit-weight profiles are orthogonal; slowdown ratio is unbounded")]
    OrthogonalProfiles,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl std::fmt::Debug, found: impl std::fmt::Debug) -> Self {
        Error::DimensionMismatch { expected: format!("{expected:?}"), found: format!("{found:?}") }
    }
}
