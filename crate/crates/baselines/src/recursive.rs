//! One-step predictors applied recursively.
//!
//! After each step the vehicle is dead-reckoned to a new pose, a new state
//! row is appended to the history (oldest dropped) and its footprint map is
//! re-rasterised. The surrounding dynamic map stays at the last observation.

use maip_grid::codes::VEHICLE;
use maip_grid::raster::vehicle_cells;
use maip_grid::{GridSpec, STATE_DIM};
use maip_model::{Inputs, Model, Predictor, SparseGrid};
use maip_sim::world::Intent;
use maip_sim::VehicleState;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::PredictionSample;

/// Next state row after moving with (v, θ) for `dt`; lights are held.
pub fn advance_state(prev: &[f64; STATE_DIM], v: f64, theta: f64, dt: f64) -> [f64; STATE_DIM] {
    let dist = 0.5 * (prev[3] + v) * dt;
    let h = theta.to_radians();
    let mut next = *prev;
    next[0] += dist * h.cos();
    next[1] += dist * h.sin();
    next[2] = theta;
    next[3] = v;
    next[4] = (v - prev[3]) / dt;
    next
}

fn footprint(grid_spec: &GridSpec, row: &[f64; STATE_DIM]) -> SparseGrid {
    let v = VehicleState {
        id: 0,
        x: row[0],
        y: row[1],
        theta: row[2],
        v: row[3],
        a: row[4],
        lane: 0,
        intent: Intent::F,
    };
    let mut entries: Vec<(u32, u8)> = vehicle_cells(grid_spec, &v)
        .into_iter()
        .map(|(r, c)| ((r * grid_spec.cells + c) as u32, VEHICLE))
        .collect();
    entries.sort_unstable();
    SparseGrid {
        cells: grid_spec.cells,
        entries,
    }
}

/// Runs `step` for `horizon` steps, feeding each prediction back into the inputs.
pub fn recursive_rollout(
    inp: &Inputs<'_>,
    grid_spec: &GridSpec,
    horizon: usize,
    dt: f64,
    mut step: impl FnMut(&Inputs<'_>, usize) -> Result<(f64, f64)>,
) -> Result<Vec<(f64, f64)>> {
    let x2 = inp.x2.clone();
    let mut x3 = inp.x3.clone();
    let mut x4 = inp.x4.to_vec();
    let mut out = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let cur = Inputs {
            x2: &x2,
            x3: &x3,
            x4: &x4,
        };
        let (v, th) = step(&cur, k)?;
        out.push((v, th));
        let next = advance_state(x4.last().expect("history"), v, th, dt);
        x4.remove(0);
        x4.push(next);
        x3 = footprint(grid_spec, &next);
    }
    Ok(out)
}

/// `n` recursive draws from a one-step model; each step draws its own z.
pub fn sample_recursive(
    predictor: &Predictor<'_>,
    g1: &[f64],
    inp: &Inputs<'_>,
    grid_spec: &GridSpec,
    horizon: usize,
    dt: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PredictionSample>> {
    let model: &Model = predictor.model();
    debug_assert_eq!(model.config.horizon, 1);
    (0..n)
        .map(|_| {
            let mut zs = Vec::new();
            let steps = recursive_rollout(inp, grid_spec, horizon, dt, |cur, _| {
                let s = predictor.sample(g1, cur, 1, rng)?.remove(0);
                zs.extend_from_slice(&s.z);
                Ok(s.steps[0])
            })?;
            Ok(PredictionSample { steps, z: zs })
        })
        .collect()
}
