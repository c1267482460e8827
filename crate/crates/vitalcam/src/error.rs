use std::io;
use std::path::PathBuf;

use vitalcam_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Format(String),
    #[error("video decoding failed: {0}")]
    Decode(String),
    #[error("storage: {0}")]
    Storage(#[from] rusqlite::Error),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True when the caller supplied something unusable, as opposed to a
    /// failure inside the pipeline or the host.
    pub fn is_bad_input(&self) -> bool {
        match self {
            Error::Core(e) => !matches!(e, CoreError::FlatSignal | CoreError::Degenerate(_)),
            Error::Io { source, .. } => source.kind() == io::ErrorKind::NotFound,
            Error::Format(_) | Error::InvalidRecord(_) | Error::Config(_) => true,
            Error::Decode(_) | Error::Storage(_) => false,
        }
    }
}
