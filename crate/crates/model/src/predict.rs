//! Decoder-only sampling from the prior.

use std::cell::Cell;
use std::collections::BTreeMap;

use maip_grid::{DynamicGrid, Encoder, StaticGrid, STATE_DIM};
use maip_sim::Frame;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::features::{Inputs, PreparedSample, SparseGrid, StaticInput};
use crate::network::Model;
use crate::train::draw_eps;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSample {
    /// (v in m/s, θ in degrees) for steps 1 ..= Tp.
    pub steps: Vec<(f64, f64)>,
    /// Latent draw; empty for deterministic models.
    pub z: Vec<f64>,
}

/// Folds `keys` into `seed` (SplitMix64 finaliser per key).
pub fn sample_seed(seed: u64, keys: &[u64]) -> u64 {
    let mut x = seed;
    for &k in keys {
        x ^= k
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(x << 6)
            .wrapping_add(x >> 2);
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x = z ^ (z >> 31);
    }
    x
}

/// Scene features shared by every vehicle of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Group1 {
    pub g1: Vec<f64>,
    pub dynamic: DynamicGrid,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    pub vehicles: BTreeMap<u32, Vec<PredictionSample>>,
    /// Vehicles without a full history window.
    pub skipped: Vec<u32>,
}

pub struct Predictor<'m> {
    model: &'m Model,
    x1: StaticInput,
    group1_runs: Cell<usize>,
}

impl<'m> Predictor<'m> {
    pub fn new(model: &'m Model, x1: &StaticGrid) -> Self {
        Self {
            model,
            x1: StaticInput::new(x1),
            group1_runs: Cell::new(0),
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Number of times group-1 features have been computed.
    pub fn group1_computations(&self) -> usize {
        self.group1_runs.get()
    }

    /// Static-branch features alone (no frame).
    pub fn static_features(&self) -> Result<Vec<f64>> {
        self.group1_runs.set(self.group1_runs.get() + 1);
        self.model.group1_values(&self.x1)
    }

    pub fn group1(&self, encoder: &Encoder<'_>, frame: &Frame) -> Result<Group1> {
        Ok(Group1 {
            g1: self.static_features()?,
            dynamic: encoder.dynamic(frame),
        })
    }

    /// `n` draws for one vehicle from its inputs.
    pub fn sample(
        &self,
        g1: &[f64],
        inp: &Inputs<'_>,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<PredictionSample>> {
        let m = self.model;
        let xout = m.fuse_features(g1, inp)?;
        let anchor = inp.anchor();
        if !m.config.latent {
            let steps = m.decode_values(None, &xout, anchor)?;
            return Ok(vec![
                PredictionSample {
                    steps,
                    z: Vec::new()
                };
                n
            ]);
        }
        (0..n)
            .map(|_| {
                let z = draw_eps(rng, m.config.latent_dim);
                let steps = m.decode_values(Some(&z), &xout, anchor)?;
                Ok(PredictionSample { steps, z })
            })
            .collect()
    }

    /// Draws for a prepared sample, seeded by its identity.
    pub fn sample_prepared(
        &self,
        g1: &[f64],
        s: &PreparedSample,
        n: usize,
        seed: u64,
    ) -> Result<Vec<PredictionSample>> {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(
            seed,
            &[u64::from(s.ep), u64::from(s.vehicle), s.t as u64],
        ));
        self.sample(g1, &s.inputs(), n, &mut rng)
    }

    /// Inputs of vehicle `id` from the history frames and a shared group 1.
    pub fn vehicle_inputs(
        &self,
        encoder: &Encoder<'_>,
        history: &[Frame],
        group1: &Group1,
        id: u32,
    ) -> Result<(SparseGrid, SparseGrid, Vec<[f64; STATE_DIM]>)> {
        let last = history
            .last()
            .ok_or_else(|| ModelError::Usage("empty history".into()))?;
        let (x2, x3, _) = encoder.vehicle_inputs(last, &group1.dynamic, id)?;
        let x4 = history
            .iter()
            .map(|f| maip_grid::vehicle_state_vector(f, encoder.world, id))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((SparseGrid::from_grid(&x2), SparseGrid::from_grid(&x3), x4))
    }

    pub fn predict_vehicle(
        &self,
        encoder: &Encoder<'_>,
        history: &[Frame],
        group1: &Group1,
        id: u32,
        n: usize,
        seed: u64,
    ) -> Result<Vec<PredictionSample>> {
        let (x2, x3, x4) = self.vehicle_inputs(encoder, history, group1, id)?;
        let inp = Inputs {
            x2: &x2,
            x3: &x3,
            x4: &x4,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, &[u64::from(id)]));
        self.sample(&group1.g1, &inp, n, &mut rng)
    }

    /// Predicts every vehicle of the last history frame, computing group 1 once.
    pub fn predict_frame(
        &self,
        encoder: &Encoder<'_>,
        history: &[Frame],
        n: usize,
        seed: u64,
    ) -> Result<FramePrediction> {
        let th = self.model.config.history;
        if history.len() < th {
            return Err(ModelError::Usage(format!(
                "need {th} history frames, got {}",
                history.len()
            )));
        }
        let history = &history[history.len() - th..];
        let last = history.last().expect("non-empty");
        let group1 = self.group1(encoder, last)?;
        let mut out = FramePrediction::default();
        for v in &last.vehicles {
            if history.iter().any(|f| f.vehicle(v.id).is_none()) {
                log::warn!("vehicle {} lacks a full history window; skipped", v.id);
                out.skipped.push(v.id);
                continue;
            }
            out.vehicles.insert(
                v.id,
                self.predict_vehicle(encoder, history, &group1, v.id, n, seed)?,
            );
        }
        Ok(out)
    }
}
