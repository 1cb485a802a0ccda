//! Scene encoding for the predictor: static map X1, masked dynamic map X2,
//! per-vehicle map X3, state vector X4, and training windows.

pub mod codes;
pub mod error;
pub mod grid;
pub mod mask;
pub mod raster;
pub mod samples;

pub use error::{GridError, Result};
pub use grid::{apply_mask, DynamicGrid, Grid, GridSpec, Mask, StaticGrid};
pub use mask::{build_mask, MaskConfig, MaskRule};
pub use raster::{
    encode_dynamic, encode_static, extract_vehicle_map, vehicle_state_vector, STATE_DIM,
};
pub use samples::{make_training_samples, window_index, Encoder, TrainingSample, Window};
