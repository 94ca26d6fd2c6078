use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    Size { expected: usize, got: usize },
    #[error("non-physical state: {0}")]
    Physical(String),
    #[error("singular coupling matrix (|D| = {0:e})")]
    Singular(f64),
    #[error("solver aborted at step {step} (t = {t}): {reason}")]
    Abort { step: usize, t: f64, reason: String },
    #[error("oracle invalid: {0}")]
    OracleInvalid(String),
    #[error("missing boundary sample at index {0}")]
    MissingSample(i64),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
