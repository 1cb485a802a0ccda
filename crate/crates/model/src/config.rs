use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// How the X4 state history is summarised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateEncoder {
    /// LSTM over the history, then FC4.
    Lstm,
    /// FC4 directly over the flattened history.
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub history: usize,
    pub horizon: usize,
    pub latent_dim: usize,
    pub grid_cells: usize,
    pub conv_channels: [usize; 2],
    pub conv_stride: usize,
    pub branch_width: usize,
    pub fuse_width: usize,
    pub lstm_hidden: usize,
    pub enc_hidden: usize,
    pub dec_hidden: usize,
    pub state_encoder: StateEncoder,
    /// Without a latent the decoder reads only the fused features and the
    /// model is a deterministic regressor.
    pub latent: bool,
    /// Output head units per m/s and per degree of change from the last observation.
    pub v_scale: f64,
    pub theta_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            history: 5,
            horizon: 5,
            latent_dim: 2,
            grid_cells: 50,
            conv_channels: [4, 8],
            conv_stride: 2,
            branch_width: 8,
            fuse_width: 16,
            lstm_hidden: 16,
            enc_hidden: 16,
            dec_hidden: 16,
            state_encoder: StateEncoder::Lstm,
            latent: true,
            v_scale: 1.0,
            theta_scale: 10.0,
        }
    }
}

impl ModelConfig {
    pub fn conv_out(&self) -> (usize, usize) {
        let s = self.conv_stride;
        let h1 = (self.grid_cells - 3) / s + 1;
        let h2 = (h1 - 3) / s + 1;
        (h1, h2)
    }

    pub fn cnn_features(&self) -> usize {
        let (_, h2) = self.conv_out();
        self.conv_channels[1] * h2 * h2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.history == 0 || self.horizon == 0 {
            return bad("history and horizon must be positive");
        }
        if !(1..=2).contains(&self.conv_stride) {
            return bad("conv stride must be 1 or 2");
        }
        if self.grid_cells < 3 || (self.grid_cells - 3) / self.conv_stride + 1 < 3 {
            return bad("grid too small for two 3x3 convolutions");
        }
        if self.latent && self.latent_dim == 0 {
            return bad("latent dimension must be positive");
        }
        if !(self.v_scale > 0.0 && self.theta_scale > 0.0) {
            return bad("output scales must be positive");
        }
        Ok(())
    }
}

/// Squared-error weights: residuals are divided by these before squaring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub v: f64,
    pub theta: f64,
}

impl LossWeights {
    pub const UNIT: LossWeights = LossWeights { v: 1.0, theta: 1.0 };
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            v: 1.0,
            theta: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub beta: f64,
    /// Fraction of all steps over which β ramps linearly from 0.
    pub warmup: f64,
    pub clip_norm: f64,
    pub seed: u64,
    pub weights: LossWeights,
    /// Use plain gradient descent instead of the adaptive optimiser.
    pub sgd: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 8,
            batch: 32,
            lr: 3e-3,
            beta: 0.5,
            warmup: 0.1,
            clip_norm: 5.0,
            seed: 0,
            weights: LossWeights::default(),
            sgd: false,
        }
    }
}
