//! Compact per-sample inputs and their network encodings.

use std::collections::HashMap;

use maip_grid::codes::{DYNAMIC_MAX, STATIC_MAX};
use maip_grid::{Encoder, Grid, StaticGrid, TrainingSample, Window, STATE_DIM};
use maip_sim::world::Intent;
use maip_sim::Episode;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Width of one X4 row as fed to the network.
pub const X4_FEATURES: usize = 9;
const POS_SCALE: f64 = 50.0;
const SPEED_SCALE: f64 = 10.0;
const ACCEL_SCALE: f64 = 3.0;

/// Network encoding of one state row: position, heading as (sin, cos),
/// speed, acceleration and the light one-hot.
pub fn x4_features(s: &[f64; STATE_DIM]) -> [f64; X4_FEATURES] {
    let th = s[2].to_radians();
    [
        s[0] / POS_SCALE,
        s[1] / POS_SCALE,
        th.sin(),
        th.cos(),
        s[3] / SPEED_SCALE,
        s[4] / ACCEL_SCALE,
        s[5],
        s[6],
        s[7],
    ]
}

/// Nonzero cells of a square grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseGrid {
    pub cells: usize,
    pub entries: Vec<(u32, u8)>,
}

impl SparseGrid {
    pub fn from_grid(g: &Grid) -> Self {
        Self {
            cells: g.shape().0,
            entries: g.nonzero().map(|(i, v)| (i as u32, v)).collect(),
        }
    }

    pub fn to_grid(&self) -> Grid {
        let mut g = Grid::zeros(self.cells, self.cells);
        for &(i, v) in &self.entries {
            g.set(i as usize / self.cells, i as usize % self.cells, v);
        }
        g
    }

    /// Codes scaled by `max` into a dense row-major buffer.
    pub fn dense_scaled(&self, max: u8) -> Vec<f64> {
        let mut out = vec![0.0; self.cells * self.cells];
        for &(i, v) in &self.entries {
            out[i as usize] = f64::from(v) / f64::from(max);
        }
        out
    }

    pub fn dynamic_values(&self) -> Vec<f64> {
        self.dense_scaled(DYNAMIC_MAX)
    }
}

/// The static map as network input.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticInput {
    pub cells: usize,
    pub values: Vec<f64>,
}

impl StaticInput {
    pub fn new(grid: &StaticGrid) -> Self {
        Self {
            cells: grid.shape().0,
            values: grid.scaled(STATIC_MAX),
        }
    }
}

/// Vehicle-specific inputs of one prediction: last masked X2, last X3 and
/// the X4 history (oldest first).
#[derive(Debug, Clone, Copy)]
pub struct Inputs<'a> {
    pub x2: &'a SparseGrid,
    pub x3: &'a SparseGrid,
    pub x4: &'a [[f64; STATE_DIM]],
}

impl Inputs<'_> {
    /// Last observed (v, θ).
    pub fn anchor(&self) -> (f64, f64) {
        let last = self.x4.last().expect("non-empty history");
        (last[3], last[2])
    }
}

/// Training sample reduced to what the network reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedSample {
    pub x2: SparseGrid,
    pub x3: SparseGrid,
    pub x4: Vec<[f64; STATE_DIM]>,
    pub y: Vec<(f64, f64)>,
    pub ep: u32,
    pub vehicle: u32,
    pub t: usize,
    pub lane: usize,
    pub intent: Intent,
}

impl PreparedSample {
    pub fn inputs(&self) -> Inputs<'_> {
        Inputs {
            x2: &self.x2,
            x3: &self.x3,
            x4: &self.x4,
        }
    }

    pub fn anchor(&self) -> (f64, f64) {
        self.inputs().anchor()
    }

    /// The same sample with labels cut to the first `horizon` steps.
    pub fn truncated(&self, horizon: usize) -> Self {
        let mut s = self.clone();
        s.y.truncate(horizon);
        s
    }

    pub fn from_training(s: &TrainingSample, lane: usize, intent: Intent) -> Self {
        Self {
            x2: SparseGrid::from_grid(s.x2.last().expect("history")),
            x3: SparseGrid::from_grid(s.x3.last().expect("history")),
            x4: s.x4.clone(),
            y: s.y.clone(),
            ep: s.ep,
            vehicle: s.vehicle,
            t: s.frame,
            lane,
            intent,
        }
    }
}

/// Builds compact samples; only the last history frame is rasterised and masked.
pub fn prepare(
    encoder: &Encoder<'_>,
    episode: &Episode,
    windows: &[Window],
) -> Result<Vec<PreparedSample>> {
    let mut dyn_cache: HashMap<usize, Grid> = HashMap::new();
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        let frame = &episode.frames[w.t];
        let d = dyn_cache
            .entry(w.t)
            .or_insert_with(|| encoder.dynamic(frame));
        let (x2, x3, _) = encoder.vehicle_inputs(frame, d, w.vehicle)?;
        let mut x4 = Vec::with_capacity(encoder.history);
        for k in w.t + 1 - encoder.history..=w.t {
            x4.push(maip_grid::vehicle_state_vector(
                &episode.frames[k],
                encoder.world,
                w.vehicle,
            )?);
        }
        let y = (w.t + 1..=w.t + encoder.horizon)
            .map(|k| {
                let v = episode.frames[k]
                    .vehicle(w.vehicle)
                    .expect("window checked presence");
                (v.v, v.theta)
            })
            .collect();
        let v = frame.vehicle(w.vehicle).expect("window checked presence");
        out.push(PreparedSample {
            x2: SparseGrid::from_grid(&x2),
            x3: SparseGrid::from_grid(&x3),
            x4,
            y,
            ep: w.ep,
            vehicle: w.vehicle,
            t: w.t,
            lane: v.lane,
            intent: v.intent,
        });
    }
    Ok(out)
}

/// Windows of every episode, optionally keeping only every `stride`-th time step.
pub fn prepare_episodes(
    encoder: &Encoder<'_>,
    episodes: &[Episode],
    stride: usize,
) -> Result<Vec<PreparedSample>> {
    let mut out = Vec::new();
    for ep in episodes {
        let windows: Vec<Window> = encoder
            .windows(ep)
            .into_iter()
            .filter(|w| w.t % stride.max(1) == 0)
            .collect();
        out.extend(prepare(encoder, ep, &windows)?);
    }
    Ok(out)
}
