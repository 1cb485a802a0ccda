//! Conditional VAE predictor of future (speed, heading) sequences.
//!
//! Four branches (static map, masked dynamic map, vehicle map, state history)
//! are projected to a common width, summed and passed through one more dense
//! layer. The encoder sees those features together with the future labels;
//! the decoder maps a latent draw plus the features to Tp (v, θ) pairs.
//! At test time z comes from the standard normal prior.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod features;
pub mod loss;
pub mod network;
pub mod predict;
pub mod train;

pub use config::{LossWeights, ModelConfig, StateEncoder, TrainConfig};
pub use error::{ModelError, Result};
pub use features::{prepare, prepare_episodes, Inputs, PreparedSample, SparseGrid, StaticInput};
pub use loss::{kl_divergence, loss, reconstruction};
pub use network::{reparameterize, Model, Phase};
pub use predict::{sample_seed, FramePrediction, Group1, PredictionSample, Predictor};
pub use train::{batch_gradients, sample_loss, train, TrainReport};
