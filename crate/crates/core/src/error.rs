use thiserror::Error;

/// Errors raised by the cascade toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("training data has no samples labelled {label:+}")]
    EmptyClass { label: i8 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("weak hypothesis {index} has non-positive weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },

    #[error("profile contains no negative samples")]
    NoNegatives,

    #[error("profile contains no positive samples")]
    NoPositives,

    #[error("bad index range: r_prev = {r_prev} must be < r = {r}")]
    BadRange { r_prev: usize, r: usize },

    #[error("rejection rate never saturates within epsilon = {epsilon}")]
    NoSaturation { epsilon: f64 },

    #[error("value out of range: {0}")]
    RangeError(String),

    #[error("search space too large: {candidates} candidates exceeds {limit}")]
    TooLarge { candidates: u128, limit: u128 },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("classifier digest mismatch: cascade has {cascade}, model has {model}")]
    DigestMismatch { cascade: String, model: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status: 3 data, 4 numeric precondition, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyClass { .. }
            | Error::DimensionMismatch { .. }
            | Error::DegenerateData(_)
            | Error::NoNegatives
            | Error::NoPositives
            | Error::Parse(_)
            | Error::DigestMismatch { .. } => 3,
            Error::NonPositiveWeight { .. }
            | Error::BadRange { .. }
            | Error::NoSaturation { .. }
            | Error::RangeError(_)
            | Error::TooLarge { .. }
            | Error::BadParams(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
