//! Run configuration from `key = value` files.

use std::collections::BTreeMap;
use std::path::Path;

use maip_model::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub episodes: usize,
    pub resolution: f64,
    pub history: usize,
    pub horizon: usize,
    pub test_fraction: f64,
    /// Keep every `stride`-th window start when building training samples.
    pub stride: usize,
    pub n_samples: usize,
    pub members: usize,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            episodes: 25,
            resolution: 2.0,
            history: 5,
            horizon: 5,
            test_fraction: 0.2,
            stride: 1,
            n_samples: 20,
            members: 5,
            train: TrainConfig::default(),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| EvalError::Config {
            line: i + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(EvalError::Config {
                line: i + 1,
                reason: "empty key or value".into(),
            });
        }
        out.insert(k.to_string(), (i + 1, v.to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| EvalError::Config {
        line,
        reason: format!("bad value `{v}` for `{key}`"),
    })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "seed" => {
                self.seed = num(line, key, value)?;
                self.train.seed = self.seed;
            }
            "episodes" => self.episodes = num(line, key, value)?,
            "resolution" => self.resolution = num(line, key, value)?,
            "history" => self.history = num(line, key, value)?,
            "horizon" => self.horizon = num(line, key, value)?,
            "test_fraction" => self.test_fraction = num(line, key, value)?,
            "stride" => self.stride = num(line, key, value)?,
            "n_samples" => self.n_samples = num(line, key, value)?,
            "members" => self.members = num(line, key, value)?,
            "beta" => self.train.beta = num(line, key, value)?,
            "epochs" => self.train.epochs = num(line, key, value)?,
            "batch" => self.train.batch = num(line, key, value)?,
            "lr" => self.train.lr = num(line, key, value)?,
            "warmup" => self.train.warmup = num(line, key, value)?,
            "clip_norm" => self.train.clip_norm = num(line, key, value)?,
            "loss_v_scale" => self.train.weights.v = num(line, key, value)?,
            "loss_theta_scale" => self.train.weights.theta = num(line, key, value)?,
            "optimizer" => {
                self.train.sgd = match value {
                    "adam" => false,
                    "sgd" => true,
                    _ => {
                        return Err(EvalError::Config {
                            line,
                            reason: format!("optimizer must be adam or sgd, got `{value}`"),
                        })
                    }
                }
            }
            _ => {
                return Err(EvalError::Config {
                    line,
                    reason: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, (line, v)) in parse_pairs(text)? {
            c.set(&k, &v, line)?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }
}
