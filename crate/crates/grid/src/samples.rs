//! History/future windows over an episode.

use std::sync::Arc;

use maip_sim::world::WorldMap;
use maip_sim::{Episode, Frame};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{apply_mask, DynamicGrid, GridSpec, StaticGrid};
use crate::mask::{build_mask, MaskConfig};
use crate::raster::{
    encode_dynamic, encode_static, extract_vehicle_map, vehicle_state_vector, STATE_DIM,
};

pub const DEFAULT_HISTORY: usize = 5;
pub const DEFAULT_HORIZON: usize = 5;

/// Position of one sample: vehicle `vehicle`, last history frame `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window {
    pub ep: u32,
    pub vehicle: u32,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub x1: Arc<StaticGrid>,
    /// Masked dynamic maps, oldest first.
    pub x2: Vec<DynamicGrid>,
    pub x3: Vec<DynamicGrid>,
    pub x4: Vec<[f64; STATE_DIM]>,
    /// Future (v, θ) at t+1 ..= t+Tp.
    pub y: Vec<(f64, f64)>,
    pub vehicle: u32,
    pub frame: usize,
    pub ep: u32,
}

/// Everything needed to turn frames into network inputs.
#[derive(Debug, Clone)]
pub struct Encoder<'w> {
    pub world: &'w WorldMap,
    pub grid_spec: GridSpec,
    pub mask: MaskConfig,
    pub history: usize,
    pub horizon: usize,
    static_grid: Arc<StaticGrid>,
}

impl<'w> Encoder<'w> {
    pub fn new(
        world: &'w WorldMap,
        grid_spec: GridSpec,
        mask: MaskConfig,
        history: usize,
        horizon: usize,
    ) -> Self {
        let static_grid = Arc::new(encode_static(world, &grid_spec));
        Self {
            world,
            grid_spec,
            mask,
            history,
            horizon,
            static_grid,
        }
    }

    pub fn static_grid(&self) -> &Arc<StaticGrid> {
        &self.static_grid
    }

    pub fn dynamic(&self, frame: &Frame) -> DynamicGrid {
        encode_dynamic(frame, self.world, &self.grid_spec)
    }

    /// Masked X2, X3 and X4 of vehicle `id` at one frame, given that frame's dynamic map.
    pub fn vehicle_inputs(
        &self,
        frame: &Frame,
        dynamic: &DynamicGrid,
        id: u32,
    ) -> Result<(DynamicGrid, DynamicGrid, [f64; STATE_DIM])> {
        let m = build_mask(frame, self.world, &self.grid_spec, id, &self.mask)?;
        Ok((
            apply_mask(&m, dynamic)?,
            extract_vehicle_map(dynamic, frame, &self.grid_spec, id)?,
            vehicle_state_vector(frame, self.world, id)?,
        ))
    }

    /// Ids of vehicles present in all `history` frames ending at `t`.
    pub fn history_windows(&self, frames: &[Frame], t: usize) -> Vec<u32> {
        if t + 1 < self.history || t >= frames.len() {
            return Vec::new();
        }
        let first = &frames[t + 1 - self.history..=t];
        frames[t]
            .vehicles
            .iter()
            .map(|v| v.id)
            .filter(|&id| first.iter().all(|f| f.vehicle(id).is_some()))
            .collect()
    }

    pub fn windows(&self, episode: &Episode) -> Vec<Window> {
        window_index(episode, self.history, self.horizon)
    }

    /// Builds the samples at `windows`, encoding each frame's dynamic map once.
    pub fn samples(&self, episode: &Episode, windows: &[Window]) -> Result<Vec<TrainingSample>> {
        let mut dyn_cache: Vec<Option<DynamicGrid>> = vec![None; episode.frames.len()];
        let mut out = Vec::with_capacity(windows.len());
        for w in windows {
            let lo = w.t + 1 - self.history;
            let mut x2 = Vec::with_capacity(self.history);
            let mut x3 = Vec::with_capacity(self.history);
            let mut x4 = Vec::with_capacity(self.history);
            for k in lo..=w.t {
                let frame = &episode.frames[k];
                let d = dyn_cache[k]
                    .get_or_insert_with(|| encode_dynamic(frame, self.world, &self.grid_spec));
                let (a, b, c) = self.vehicle_inputs(frame, d, w.vehicle)?;
                x2.push(a);
                x3.push(b);
                x4.push(c);
            }
            let y = (w.t + 1..=w.t + self.horizon)
                .map(|k| {
                    let v = episode.frames[k]
                        .vehicle(w.vehicle)
                        .expect("window checked presence");
                    (v.v, v.theta)
                })
                .collect();
            out.push(TrainingSample {
                x1: Arc::clone(&self.static_grid),
                x2,
                x3,
                x4,
                y,
                vehicle: w.vehicle,
                frame: w.t,
                ep: w.ep,
            });
        }
        Ok(out)
    }
}

/// Every (vehicle, t) whose `history` past and `horizon` future frames all contain the vehicle.
pub fn window_index(episode: &Episode, history: usize, horizon: usize) -> Vec<Window> {
    let n = episode.frames.len();
    if history == 0 || n < history + horizon {
        return Vec::new();
    }
    let mut ids: Vec<u32> = episode
        .frames
        .iter()
        .flat_map(|f| f.vehicles.iter().map(|v| v.id))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let mut out = Vec::new();
    for id in ids {
        let present: Vec<bool> = episode
            .frames
            .iter()
            .map(|f| f.vehicle(id).is_some())
            .collect();
        // run[k] = consecutive frames ending at k containing the vehicle
        let mut run = vec![0usize; n];
        for k in 0..n {
            run[k] = if present[k] {
                1 + if k > 0 { run[k - 1] } else { 0 }
            } else {
                0
            };
        }
        for t in history - 1..n - horizon {
            if run[t + horizon] >= history + horizon {
                out.push(Window {
                    ep: episode.ep,
                    vehicle: id,
                    t,
                });
            }
        }
    }
    out
}

pub fn make_training_samples(
    episode: &Episode,
    world: &WorldMap,
    grid_spec: &GridSpec,
    history: usize,
    horizon: usize,
) -> Result<Vec<TrainingSample>> {
    let enc = Encoder::new(world, *grid_spec, MaskConfig::default(), history, horizon);
    let windows = enc.windows(episode);
    enc.samples(episode, &windows)
}
