use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid world geometry: {0}")]
    InvalidWorld(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("unknown vehicle id {0}")]
    UnknownVehicle(u32),
    #[error("no path for lane {lane} with intent {intent:?}")]
    NoPath {
        lane: usize,
        intent: crate::world::Intent,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed dataset: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
