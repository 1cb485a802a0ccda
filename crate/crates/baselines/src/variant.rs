use std::fmt;
use std::str::FromStr;

use maip_model::{Inputs, ModelConfig, Predictor, StateEncoder};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BaselineError, Result};
use crate::PredictionSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "MAIP")]
    Maip,
    #[serde(rename = "IDM")]
    Idm,
    #[serde(rename = "CNN_LSTM")]
    CnnLstm,
    #[serde(rename = "CNN_CVAE")]
    CnnCvae,
    #[serde(rename = "MAIP_RECURSIVE")]
    MaipRecursive,
    #[serde(rename = "CONST_VEL")]
    ConstVel,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Maip,
        Variant::Idm,
        Variant::CnnLstm,
        Variant::CnnCvae,
        Variant::MaipRecursive,
        Variant::ConstVel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Maip => "MAIP",
            Variant::Idm => "IDM",
            Variant::CnnLstm => "CNN_LSTM",
            Variant::CnnCvae => "CNN_CVAE",
            Variant::MaipRecursive => "MAIP_RECURSIVE",
            Variant::ConstVel => "CONST_VEL",
        }
    }

    pub fn is_learned(self) -> bool {
        !matches!(self, Variant::Idm | Variant::ConstVel)
    }

    /// Whether repeated draws can differ.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Variant::Maip | Variant::CnnCvae | Variant::MaipRecursive | Variant::CnnLstm
        )
    }

    /// Independently initialised members trained for this variant.
    pub fn default_members(self) -> usize {
        match self {
            Variant::CnnLstm => 5,
            _ => 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| BaselineError::UnknownVariant(s.to_string()))
    }
}

/// Network layout of a learned variant derived from the MAIP defaults.
pub fn model_config(variant: Variant, base: &ModelConfig) -> Option<ModelConfig> {
    let mut c = base.clone();
    match variant {
        Variant::Maip => {}
        Variant::CnnLstm => c.latent = false,
        Variant::CnnCvae => c.state_encoder = StateEncoder::Dense,
        Variant::MaipRecursive => c.horizon = 1,
        Variant::Idm | Variant::ConstVel => return None,
    }
    Some(c)
}

/// `n` samples from an ensemble of deterministic members: sample `i` comes
/// from member `i mod members`.
pub fn ensemble_samples(
    members: &[Predictor<'_>],
    g1s: &[Vec<f64>],
    inp: &Inputs<'_>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PredictionSample>> {
    if members.is_empty() {
        return Err(BaselineError::Untrained("CNN_LSTM"));
    }
    let mut per_member = Vec::with_capacity(members.len());
    for (p, g1) in members.iter().zip(g1s) {
        per_member.push(p.sample(g1, inp, 1, rng)?.remove(0));
    }
    Ok((0..n)
        .map(|i| per_member[i % members.len()].clone())
        .collect())
}
