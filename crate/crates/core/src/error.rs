use thiserror::Error;

/// Errors produced anywhere in the clustering pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecwaError {
    /// Invalid parameters or mismatched shapes supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data that cannot enter the pipeline (non-finite values, ragged rows).
    #[error("data error: {0}")]
    Data(String),
    /// A stage received degenerate input it cannot work with.
    #[error("pipeline error: {0}")]
    Pipeline(String),
}

impl DecwaError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        DecwaError::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        DecwaError::Data(msg.into())
    }

    pub(crate) fn pipeline(msg: impl Into<String>) -> Self {
        DecwaError::Pipeline(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, DecwaError>;
