#![allow(dead_code)]

use maip_grid::{GridSpec, MaskConfig, STATE_DIM};
use maip_model::{ModelConfig, PreparedSample, SparseGrid, StaticInput};
use maip_sim::world::Intent;
use maip_sim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A 12×12 grid keeps full-model tests fast.
pub fn small_config() -> ModelConfig {
    ModelConfig {
        grid_cells: 12,
        ..ModelConfig::default()
    }
}

pub fn static_input(cells: usize, seed: u64) -> StaticInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StaticInput {
        cells,
        values: (0..cells * cells)
            .map(|_| f64::from(rng.random_range(0u8..10)) / 9.0)
            .collect(),
    }
}

/// Random sparse maps and a plausible straight-line state history.
pub fn synthetic_sample(cells: usize, history: usize, horizon: usize, seed: u64) -> PreparedSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (cells * cells) as u32;
    let mut x2: Vec<(u32, u8)> = Vec::new();
    for i in 0..n {
        if rng.random_bool(0.15) {
            x2.push((i, rng.random_range(1u8..=5)));
        }
    }
    let x3: Vec<(u32, u8)> = x2.iter().filter(|e| e.1 == 1).take(4).copied().collect();
    let v0 = rng.random_range(3.0..10.0);
    let th0 = rng.random_range(-170.0..170.0);
    let x4: Vec<[f64; STATE_DIM]> = (0..history)
        .map(|k| {
            let t = k as f64 * 0.2;
            [1.75, -40.0 + v0 * t, th0, v0, 0.0, 0.0, 1.0, 0.0]
        })
        .collect();
    let y = (1..=horizon)
        .map(|k| (v0 + 0.1 * k as f64, th0 + k as f64))
        .collect();
    PreparedSample {
        x2: SparseGrid { cells, entries: x2 },
        x3: SparseGrid { cells, entries: x3 },
        x4,
        y,
        ep: 0,
        vehicle: seed as u32,
        t: history - 1,
        lane: 0,
        intent: Intent::F,
    }
}

pub fn world() -> WorldMap {
    WorldMap::build(&SimConfig::default()).unwrap()
}

pub fn grid_spec() -> GridSpec {
    GridSpec::new(50.0, 2.0).unwrap()
}

pub fn mask() -> MaskConfig {
    MaskConfig::default()
}

/// `history` frames of `count` vehicles driving straight at 8 m/s, spread
/// over all eight inbound lanes.
pub fn crowded_history(
    world: &WorldMap,
    count: usize,
    history: usize,
    lights: Lights,
) -> Vec<Frame> {
    (0..history)
        .map(|k| {
            let vehicles = (0..count)
                .map(|i| {
                    let lane = i % 8;
                    let s = 2.0 + 9.0 * (i / 8) as f64 + 8.0 * 0.2 * k as f64;
                    let (p, theta) = world.path_for(lane, Intent::F).unwrap().pose_at(s);
                    VehicleState {
                        id: i as u32 + 1,
                        x: p.x,
                        y: p.y,
                        theta,
                        v: 8.0,
                        a: 0.0,
                        lane,
                        intent: Intent::F,
                    }
                })
                .collect();
            Frame {
                ep: 0,
                t: k as u32,
                lights,
                vehicles,
                peds: Vec::new(),
            }
        })
        .collect()
}
