//! Episode generation and the JSON-Lines dataset format with its sidecar.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::frame::Frame;
use crate::scenario::{ScenarioCase, ScenarioMix};
use crate::sim::Simulator;
use crate::world::WorldMap;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub ep: u32,
    pub seed: u64,
    pub case: ScenarioCase,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub ep: u32,
    pub seed: u64,
    pub case: ScenarioCase,
    pub frames: usize,
}

/// Contents of `<dataset>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub seed: u64,
    pub dt: f64,
    pub config: SimConfig,
    pub mix: ScenarioMix,
    /// Named code tables (e.g. grid cell codes), name → code.
    #[serde(default)]
    pub codes: BTreeMap<String, BTreeMap<String, u8>>,
    pub episodes: Vec<EpisodeMeta>,
}

impl DatasetMeta {
    pub fn case_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for e in &self.episodes {
            let key = serde_json::to_value(e.case)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }
}

pub fn generate_episode(
    world: &WorldMap,
    cfg: &SimConfig,
    ep: u32,
    seed: u64,
    case: ScenarioCase,
) -> Result<Episode> {
    let sim = Simulator::new(world, cfg, ep, seed, case)?;
    Ok(Episode {
        ep,
        seed,
        case,
        frames: sim.run(cfg.frames_per_episode()),
    })
}

/// Episodes for a master seed: cases by quota, per-episode seeds drawn from the master stream.
pub fn generate_episodes(
    world: &WorldMap,
    cfg: &SimConfig,
    n_episodes: usize,
    seed: u64,
    mix: &ScenarioMix,
) -> Result<Vec<Episode>> {
    if n_episodes == 0 {
        return Err(SimError::InvalidConfig("need at least one episode".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = mix.assign(n_episodes, &mut rng);
    let seeds: Vec<u64> = (0..n_episodes).map(|_| rng.next_u64()).collect();
    cases
        .iter()
        .zip(seeds)
        .enumerate()
        .map(|(k, (&case, s))| generate_episode(world, cfg, k as u32, s, case))
        .collect()
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_jsonl<'a>(out: &Path, frames: impl IntoIterator<Item = &'a Frame>) -> Result<()> {
    let file = File::create(out).map_err(io_err(out))?;
    let mut w = BufWriter::new(file);
    for f in frames {
        let line = serde_json::to_string(f).map_err(|source| SimError::Json {
            path: out.to_path_buf(),
            line: f.t as usize,
            source,
        })?;
        w.write_all(line.as_bytes()).map_err(io_err(out))?;
        w.write_all(b"\n").map_err(io_err(out))?;
    }
    w.flush().map_err(io_err(out))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Frame>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut frames = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Frame = serde_json::from_str(&line).map_err(|source| SimError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        frames.push(f);
    }
    Ok(frames)
}

pub fn write_meta(out: &Path, meta: &DatasetMeta) -> Result<()> {
    let p = meta_path(out);
    let text = serde_json::to_string_pretty(meta).map_err(|source| SimError::Json {
        path: p.clone(),
        line: 0,
        source,
    })?;
    std::fs::write(&p, text).map_err(io_err(&p))
}

pub fn read_meta(data: &Path) -> Result<DatasetMeta> {
    let p = meta_path(data);
    let text = std::fs::read_to_string(&p).map_err(io_err(&p))?;
    let meta: DatasetMeta = serde_json::from_str(&text).map_err(|source| SimError::Json {
        path: p.clone(),
        line: 0,
        source,
    })?;
    if meta.format_version != FORMAT_VERSION {
        return Err(SimError::Format(format!(
            "sidecar format version {} (expected {FORMAT_VERSION})",
            meta.format_version
        )));
    }
    Ok(meta)
}

/// Generates episodes and writes the JSONL file plus its sidecar.
pub fn generate_dataset(
    world: &WorldMap,
    cfg: &SimConfig,
    n_episodes: usize,
    seed: u64,
    mix: &ScenarioMix,
    out: &Path,
    codes: BTreeMap<String, BTreeMap<String, u8>>,
) -> Result<DatasetMeta> {
    let episodes = generate_episodes(world, cfg, n_episodes, seed, mix)?;
    write_jsonl(out, episodes.iter().flat_map(|e| e.frames.iter()))?;
    let meta = DatasetMeta {
        format_version: FORMAT_VERSION,
        seed,
        dt: cfg.dt,
        config: cfg.clone(),
        mix: *mix,
        codes,
        episodes: episodes
            .iter()
            .map(|e| EpisodeMeta {
                ep: e.ep,
                seed: e.seed,
                case: e.case,
                frames: e.frames.len(),
            })
            .collect(),
    };
    write_meta(out, &meta)?;
    log::info!("wrote {} episodes to {}", n_episodes, out.display());
    Ok(meta)
}

/// Splits a flat frame list into episodes (frames keep file order within each).
pub fn group_episodes(frames: Vec<Frame>, meta: Option<&DatasetMeta>) -> Result<Vec<Episode>> {
    let mut out: Vec<Episode> = Vec::new();
    for f in frames {
        match out.last_mut() {
            Some(e) if e.ep == f.ep => {
                if f.t as usize != e.frames.len() + e.frames[0].t as usize {
                    return Err(SimError::Format(format!(
                        "episode {} frame {} out of order",
                        f.ep, f.t
                    )));
                }
                e.frames.push(f)
            }
            _ => {
                let (seed, case) = meta
                    .and_then(|m| m.episodes.iter().find(|e| e.ep == f.ep))
                    .map(|e| (e.seed, e.case))
                    .unwrap_or((0, ScenarioCase::UnprotectedLeft));
                out.push(Episode {
                    ep: f.ep,
                    seed,
                    case,
                    frames: vec![f],
                })
            }
        }
    }
    Ok(out)
}

/// Reads a dataset and its sidecar (if present) back into episodes.
pub fn read_dataset(path: &Path) -> Result<(Vec<Episode>, Option<DatasetMeta>)> {
    let frames = read_jsonl(path)?;
    let meta = if meta_path(path).exists() {
        Some(read_meta(path)?)
    } else {
        None
    };
    let episodes = group_episodes(frames, meta.as_ref())?;
    Ok((episodes, meta))
}
