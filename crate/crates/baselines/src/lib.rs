//! Baseline predictors sharing the [`PredictionSample`] interface.

pub mod error;
pub mod idm;
pub mod recursive;
pub mod variant;

pub use error::{BaselineError, Result};
pub use idm::{const_vel, idm_inputs, idm_rollout, IdmInput};
pub use maip_model::PredictionSample;
pub use recursive::{advance_state, recursive_rollout, sample_recursive};
pub use variant::{ensemble_samples, model_config, Variant};
