use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has no nonzero entry")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("outcome {outcome} of measurement `{measurement}` has zero probability")]
    ZeroProbabilityBranch {
        measurement: String,
        outcome: String,
    },

    #[error("outcome {outcome} is not valid for measurement `{measurement}`")]
    InvalidOutcome {
        measurement: String,
        outcome: String,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("resource limit exceeded: {what} reached {value} (limit {limit})")]
    ResourceLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("transducer is truncated; the operation needs a closed machine")]
    Truncated,

    #[error("stationary distribution is not unique: {} closed communicating classes", .classes.len())]
    NonUniqueStationary {
        /// One stationary solution per closed class, as (state index, probability) pairs.
        classes: Vec<Vec<(usize, num_rational::BigRational)>>,
    },

    #[error("classical run left the built state set at step {step}")]
    TruncationExceeded { step: usize },

    #[error("insufficient data: no context reached {n_min} occurrences in both traces")]
    InsufficientData { n_min: u64 },

    #[error("unknown measurement label `{0}`")]
    UnknownMeasurement(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
