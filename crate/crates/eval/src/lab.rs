//! Glue from datasets to trained variants and their predictions.

use std::collections::HashMap;

use maip_baselines::{
    const_vel, ensemble_samples, idm_inputs, idm_rollout, model_config, sample_recursive, Variant,
};
use maip_grid::{Encoder, GridSpec, MaskConfig};
use maip_model::{
    sample_seed, train, Model, ModelConfig, PredictionSample, Predictor, PreparedSample,
    StaticInput, TrainConfig, TrainReport,
};
use maip_sim::{Episode, IdmParams, SimConfig, WorldMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::Result;
use crate::metrics::{rmse_rows, MetricRow};

pub struct Lab {
    pub sim: SimConfig,
    pub world: WorldMap,
    pub grid_spec: GridSpec,
    pub run: RunConfig,
}

impl Lab {
    pub fn new(sim: SimConfig, run: RunConfig) -> Result<Self> {
        let world = WorldMap::build(&sim)?;
        let grid_spec = GridSpec::new(world.half_extent(), run.resolution)?;
        Ok(Self {
            sim,
            world,
            grid_spec,
            run,
        })
    }

    pub fn encoder(&self) -> Encoder<'_> {
        Encoder::new(
            &self.world,
            self.grid_spec,
            MaskConfig::default(),
            self.run.history,
            self.run.horizon,
        )
    }

    pub fn base_model_config(&self) -> ModelConfig {
        ModelConfig {
            history: self.run.history,
            horizon: self.run.horizon,
            grid_cells: self.grid_spec.cells,
            ..ModelConfig::default()
        }
    }

    pub fn dt(&self) -> f64 {
        self.sim.dt
    }

    pub fn static_input(&self) -> StaticInput {
        StaticInput::new(self.encoder().static_grid())
    }

    pub fn prepare(&self, episodes: &[Episode], stride: usize) -> Result<Vec<PreparedSample>> {
        Ok(maip_model::prepare_episodes(
            &self.encoder(),
            episodes,
            stride,
        )?)
    }

    /// Trains every member of a learned variant; member `i` uses seed `(seed, i)`.
    pub fn train_variant(
        &self,
        variant: Variant,
        data: &[PreparedSample],
        members: usize,
        cfg: &TrainConfig,
    ) -> Result<(Vec<Model>, Vec<TrainReport>)> {
        let Some(mc) = model_config(variant, &self.base_model_config()) else {
            return Ok((Vec::new(), Vec::new()));
        };
        let truncated: Vec<PreparedSample>;
        let data = if mc.horizon < self.run.horizon {
            truncated = data.iter().map(|s| s.truncated(mc.horizon)).collect();
            &truncated[..]
        } else {
            data
        };
        let x1 = self.static_input();
        let mut models = Vec::new();
        let mut reports = Vec::new();
        for i in 0..members.max(1) {
            let seed = sample_seed(cfg.seed, &[i as u64]);
            let mut m = Model::init(mc.clone(), seed)?;
            let c = TrainConfig {
                seed,
                ..cfg.clone()
            };
            reports.push(train(&mut m, &x1, data, &c)?);
            models.push(m);
        }
        Ok((models, reports))
    }

    /// Predictions of `variant` for every sample: `n` draws for stochastic
    /// methods, one for deterministic ones.
    pub fn predict_variant(
        &self,
        variant: Variant,
        models: &[Model],
        samples: &[PreparedSample],
        episodes: &[Episode],
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<PredictionSample>>> {
        let tp = self.run.horizon;
        let x1 = self.encoder().static_grid().clone();
        let by_ep: HashMap<u32, &Episode> = episodes.iter().map(|e| (e.ep, e)).collect();
        let idm = IdmParams::default();
        let predictors: Vec<Predictor<'_>> =
            models.iter().map(|m| Predictor::new(m, &x1)).collect();
        if variant.is_learned() && predictors.is_empty() {
            return Err(maip_baselines::BaselineError::Untrained(variant.name()).into());
        }
        let g1s: Vec<Vec<f64>> = predictors
            .iter()
            .map(|p| p.static_features())
            .collect::<std::result::Result<_, _>>()?;
        let mut out = Vec::with_capacity(samples.len());
        for s in samples {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(
                seed,
                &[u64::from(s.ep), u64::from(s.vehicle), s.t as u64],
            ));
            let draws = match variant {
                Variant::ConstVel => {
                    let (v, th) = s.anchor();
                    vec![const_vel(v, th, tp)]
                }
                Variant::Idm => {
                    let frame = &by_ep[&s.ep].frames[s.t];
                    let inp = idm_inputs(&self.world, frame, s.vehicle, self.sim.vehicle_length)?;
                    vec![idm_rollout(&inp, tp, self.dt(), &idm)]
                }
                Variant::Maip | Variant::CnnCvae => {
                    predictors[0].sample(&g1s[0], &s.inputs(), n, &mut rng)?
                }
                Variant::CnnLstm => ensemble_samples(&predictors, &g1s, &s.inputs(), n, &mut rng)?,
                Variant::MaipRecursive => sample_recursive(
                    &predictors[0],
                    &g1s[0],
                    &s.inputs(),
                    &self.grid_spec,
                    tp,
                    self.dt(),
                    n,
                    &mut rng,
                )?,
            };
            out.push(draws);
        }
        Ok(out)
    }

    pub fn evaluate(
        &self,
        variant: Variant,
        models: &[Model],
        samples: &[PreparedSample],
        episodes: &[Episode],
        n: usize,
        seed: u64,
    ) -> Result<Vec<MetricRow>> {
        let preds = self.predict_variant(variant, models, samples, episodes, n, seed)?;
        let truth: Vec<Vec<(f64, f64)>> = samples.iter().map(|s| s.y.clone()).collect();
        let deterministic = !variant.is_stochastic();
        rmse_rows(variant.name(), &preds, &truth, self.dt(), deterministic)
    }
}

/// First `1 - test_fraction` of the episodes for training, the rest held out.
pub fn split_episodes(episodes: &[Episode], test_fraction: f64) -> (Vec<Episode>, Vec<Episode>) {
    let n = episodes.len();
    let n_test = ((n as f64 * test_fraction).round() as usize).min(n.saturating_sub(1));
    let cut = n - n_test;
    (episodes[..cut].to_vec(), episodes[cut..].to_vec())
}
