use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty test set")]
    EmptyTestSet,
    #[error("{0}")]
    Mismatch(String),
    #[error("mode clustering needs at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] maip_model::ModelError),
    #[error(transparent)]
    Baseline(#[from] maip_baselines::BaselineError),
    #[error(transparent)]
    Grid(#[from] maip_grid::GridError),
    #[error(transparent)]
    Sim(#[from] maip_sim::SimError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
