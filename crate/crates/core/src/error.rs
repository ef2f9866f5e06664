use std::path::PathBuf;

/// Errors surfaced by every module of the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid image pair: {0}")]
    InvalidPair(String),
    #[error("no free space left in the selected region")]
    NoSpace,
    #[error("tattoo would be scaled to {width}x{height} px, below the {min} px minimum")]
    TooSmall { width: f64, height: f64, min: u32 },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image codec: {0}")]
    Codec(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn landmarks(msg: impl Into<String>) -> Self {
        Error::InvalidLandmarks(msg.into())
    }
}
