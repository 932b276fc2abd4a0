use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HebbError>;

#[derive(Debug, Error)]
pub enum HebbError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The growth cap was hit while trying to append a neuron.
    #[error("neuron capacity reached ({max} rows)")]
    Capacity { max: usize },

    /// Every neuron is frozen and the winner policy needs an unfrozen one.
    #[error("no eligible (unfrozen) neuron left")]
    CapacityExhausted,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{context}: format error at byte offset {offset}: {message}")]
    Format {
        context: String,
        offset: u64,
        message: String,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// A dataset directory or file is absent; the message says what to fetch.
    #[error("dataset not found: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("image error: {0}")]
    Image(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HebbError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HebbError::InvalidArgument(msg.into())
    }

    pub(crate) fn format(context: impl Into<String>, offset: u64, message: impl Into<String>) -> Self {
        HebbError::Format {
            context: context.into(),
            offset,
            message: message.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HebbError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
