use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("configuration error in `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("schedule error at index {index}: {msg}")]
    Schedule { index: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn schedule(index: usize, msg: impl Into<String>) -> Self {
        Error::Schedule {
            index,
            msg: msg.into(),
        }
    }
}
