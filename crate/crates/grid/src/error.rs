use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("resolution {resolution} m does not divide the {extent} m extent")]
    Resolution { resolution: f64, extent: f64 },
    #[error("vehicle {0} not in frame")]
    UnknownVehicle(u32),
    #[error("grid shape mismatch: {expected:?} vs {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("mask holds non-binary value {0}")]
    NotBinary(u8),
    #[error(transparent)]
    Sim(#[from] maip_sim::SimError),
}

pub type Result<T> = std::result::Result<T, GridError>;
