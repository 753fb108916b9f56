use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, configuration value or index.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Not enough pairs, images or identities to satisfy a request.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Every feature has been excluded from the stump search.
    #[error("no admissible feature left: {0}")]
    Exhausted(String),

    /// The mutual-information filter rejected every remaining candidate.
    #[error("mutual-information filter exhausted at round {round}")]
    FilterExhausted { round: usize },

    /// Sampled weights summed to zero.
    #[error("degenerate weights at round {round}: sampled weights sum to zero")]
    DegenerateWeights { round: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("layout mismatch: model has `{expected}`, data has `{found}`")]
    LayoutMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Process exit code: 3 for algorithmic failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Exhausted(_) | Error::FilterExhausted { .. } | Error::DegenerateWeights { .. } => 3,
            _ => 2,
        }
    }
}
