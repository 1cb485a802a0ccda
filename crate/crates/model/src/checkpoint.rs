//! Model <-> checkpoint file.

use std::path::Path;

use maip_autodiff::checkpoint::{Checkpoint, CheckpointHeader, FORMAT_VERSION};
use maip_autodiff::ParamSet;

use crate::config::ModelConfig;
use crate::error::{ModelError, Result};
use crate::network::Model;

/// Several models saved in one file, parameters prefixed by `m<i>/`.
pub fn to_checkpoint(
    variant: &str,
    members: &[&Model],
    resolution: f64,
    extra: serde_json::Value,
) -> Result<Checkpoint> {
    let first = members
        .first()
        .ok_or_else(|| ModelError::Usage("no models to save".into()))?;
    let c = &first.config;
    let mut params = ParamSet::new();
    for (i, m) in members.iter().enumerate() {
        if m.config != *c {
            return Err(ModelError::Usage(
                "ensemble members must share a configuration".into(),
            ));
        }
        for (name, t) in m.params.iter() {
            params.insert(format!("m{i}/{name}"), t.clone())?;
        }
    }
    let config = serde_json::json!({
        "model": c,
        "members": members.len(),
        "extra": extra,
    });
    Ok(Checkpoint {
        header: CheckpointHeader {
            format_version: FORMAT_VERSION,
            variant: variant.to_string(),
            latent_dim: if c.latent { c.latent_dim } else { 0 },
            history: c.history,
            horizon: c.horizon,
            grid_cells: c.grid_cells,
            resolution,
            config,
        },
        params,
    })
}

pub fn from_checkpoint(ck: &Checkpoint) -> Result<Vec<Model>> {
    let bad = |m: &str| ModelError::Checkpoint(m.to_string());
    let cfg: ModelConfig = serde_json::from_value(
        ck.header
            .config
            .get("model")
            .cloned()
            .ok_or_else(|| bad("missing model config"))?,
    )
    .map_err(|e| bad(&e.to_string()))?;
    let members = ck
        .header
        .config
        .get("members")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| bad("missing member count"))?;
    if cfg.history != ck.header.history
        || cfg.horizon != ck.header.horizon
        || cfg.grid_cells != ck.header.grid_cells
    {
        return Err(bad("header disagrees with the stored model config"));
    }
    (0..members)
        .map(|i| {
            Model::from_parts(
                cfg.clone(),
                ck.params.with_prefix_stripped(&format!("m{i}/")),
            )
        })
        .collect()
}

pub fn save(
    path: impl AsRef<Path>,
    variant: &str,
    members: &[&Model],
    resolution: f64,
    extra: serde_json::Value,
) -> Result<()> {
    Ok(to_checkpoint(variant, members, resolution, extra)?.save(path)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<(Checkpoint, Vec<Model>)> {
    let ck = Checkpoint::load(path)?;
    let models = from_checkpoint(&ck)?;
    Ok((ck, models))
}
