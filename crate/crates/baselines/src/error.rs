use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Model(#[from] maip_model::ModelError),
    #[error(transparent)]
    Grid(#[from] maip_grid::GridError),
    #[error("unknown method `{0}`")]
    UnknownVariant(String),
    #[error("{0} needs trained parameters")]
    Untrained(&'static str),
    #[error("vehicle {0} not in frame")]
    UnknownVehicle(u32),
}

pub type Result<T> = std::result::Result<T, BaselineError>;
