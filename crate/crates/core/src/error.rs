use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the signal-processing core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("signal has no oscillatory content")]
    FlatSignal,
    #[error("fewer than three peaks detected ({found})")]
    InsufficientPeaks { found: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("no face in region of interest")]
    NoFace,
    #[error("unusable recording: {0}")]
    UnusableRecording(&'static str),
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(&'static str),
    #[error("configuration error: {0}")]
    Config(alloc::string::String),
}
