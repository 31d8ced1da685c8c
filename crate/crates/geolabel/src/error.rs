use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("generation error (seed {seed}): {msg}")]
    Generation { seed: u64, msg: String },
    #[error("size error: {0}")]
    Size(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("realization error: {0}")]
    Realization(String),
    #[error("not a semilinear polynomial: {0}")]
    NotSemilinear(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
