//! Versioned parameter container stored as JSON.
//!
//! Floats are written with shortest round-trip formatting and parsed back
//! exactly, so a save/load cycle reproduces every parameter bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{AutodiffError, ParamSet, Result, Tensor};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    /// Model family tag, e.g. `maip` or `cnn_lstm`.
    pub variant: String,
    pub latent_dim: usize,
    pub history: usize,
    pub horizon: usize,
    pub grid_cells: usize,
    pub resolution: f64,
    /// Free-form model configuration owned by the caller.
    #[serde(default)]
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StoredParam {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Stored {
    header: CheckpointHeader,
    params: Vec<StoredParam>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: ParamSet,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.stored())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_stored(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &self.stored())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        Self::from_stored(serde_json::from_reader(r)?)
    }

    fn stored(&self) -> Stored {
        Stored {
            header: self.header.clone(),
            params: self
                .params
                .iter()
                .map(|(name, t)| StoredParam {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                    values: t.values().to_vec(),
                })
                .collect(),
        }
    }

    fn from_stored(stored: Stored) -> Result<Self> {
        if stored.header.format_version != FORMAT_VERSION {
            return Err(AutodiffError::Checkpoint(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                stored.header.format_version
            )));
        }
        let mut params = ParamSet::new();
        for p in stored.params {
            params.insert(p.name, Tensor::new(p.shape, p.values)?)?;
        }
        Ok(Checkpoint {
            header: stored.header,
            params,
        })
    }
}
