use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown {what} `{name}`; valid values: {}", valid.join(", "))]
    Unknown {
        what: &'static str,
        name: String,
        valid: Vec<String>,
    },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("simulation aborted at tick {tick} (t = {t:.2} s), {entity}: {message}")]
    SimAbort {
        tick: usize,
        t: f64,
        entity: String,
        message: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid { key: key.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
