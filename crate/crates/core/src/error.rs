use crate::corpus::signature::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array lengths or matrix shapes disagree.
    #[error("shape error: {0}")]
    Shape(String),

    /// Handedness threshold calibration could not run.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Rule configuration is unusable (e.g. reference class too small).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with mismatched arguments.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("malformed record: {0}")]
    Record(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
