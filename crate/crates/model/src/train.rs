//! Mini-batch training.
//!
//! The static branch depends only on the parameters, so each batch computes
//! it once in its own graph, feeds its value to every per-sample graph as a
//! leaf, and pushes the summed upstream gradient back through it at the end.

use maip_autodiff::optim::{Optimizer, OptimizerConfig};
use maip_autodiff::{Graph, ParamBinding, ParamGrads, Tensor};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{LossWeights, TrainConfig};
use crate::error::{ModelError, Result};
use crate::features::{PreparedSample, StaticInput};
use crate::loss::{kl_var, reconstruction_var};
use crate::network::{reparameterize_var, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean total loss per epoch.
    pub loss: Vec<f64>,
    pub reconstruction: Vec<f64>,
    pub kl: Vec<f64>,
    pub steps: u64,
}

/// Per-sample loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

pub fn draw_eps(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Loss of one sample given the group-1 features `g1` (a leaf when gradients
/// are wanted). Returns the loss node and its parts.
fn sample_graph(
    model: &Model,
    g: &mut Graph,
    b: &mut ParamBinding<'_>,
    g1: maip_autodiff::Var,
    s: &PreparedSample,
    eps: &[f64],
    beta: f64,
    w: LossWeights,
) -> Result<(maip_autodiff::Var, LossParts)> {
    let inp = s.inputs();
    let anchor = inp.anchor();
    let xout = model.fuse(g, b, g1, &inp)?;
    if model.config.latent {
        let (mu, lv) = model.encode(g, b, xout, &s.y, anchor)?;
        let z = reparameterize_var(g, mu, lv, eps)?;
        let (v, th) = model.decode(g, b, Some(z), xout, anchor)?;
        let rec = reconstruction_var(g, v, th, &s.y, w)?;
        let kl = kl_var(g, mu, lv)?;
        let bkl = g.scale(kl, beta);
        let total = g.add(rec, bkl)?;
        let parts = LossParts {
            total: g.value(total).item(),
            reconstruction: g.value(rec).item(),
            kl: g.value(kl).item(),
        };
        Ok((total, parts))
    } else {
        let (v, th) = model.decode(g, b, None, xout, anchor)?;
        let rec = reconstruction_var(g, v, th, &s.y, w)?;
        let r = g.value(rec).item();
        Ok((
            rec,
            LossParts {
                total: r,
                reconstruction: r,
                kl: 0.0,
            },
        ))
    }
}

/// Loss of one sample with fixed noise, without gradients.
pub fn sample_loss(
    model: &Model,
    x1: &StaticInput,
    s: &PreparedSample,
    eps: &[f64],
    beta: f64,
    w: LossWeights,
) -> Result<LossParts> {
    let mut g = Graph::new();
    let mut b = ParamBinding::frozen(&model.params);
    let g1 = model.group1(&mut g, &mut b, x1)?;
    Ok(sample_graph(model, &mut g, &mut b, g1, s, eps, beta, w)?.1)
}

/// Summed loss and parameter gradients over `batch`, with the static branch
/// evaluated once and shared.
pub fn batch_gradients(
    model: &Model,
    x1: &StaticInput,
    batch: &[&PreparedSample],
    eps: &[Vec<f64>],
    beta: f64,
    w: LossWeights,
) -> Result<(LossParts, ParamGrads)> {
    let mut acc = ParamGrads::zeros(&model.params);
    let mut g1_graph = Graph::new();
    let mut g1_bind = ParamBinding::trainable(&model.params);
    let g1 = model.group1(&mut g1_graph, &mut g1_bind, x1)?;
    let g1_values = g1_graph.values(g1).to_vec();
    let mut g1_seed = vec![0.0; g1_values.len()];
    let mut sum = LossParts {
        total: 0.0,
        reconstruction: 0.0,
        kl: 0.0,
    };
    for (s, e) in batch.iter().zip(eps) {
        let mut g = Graph::new();
        let mut b = ParamBinding::trainable(&model.params);
        let leaf = g.leaf(Tensor::vector(g1_values.clone()));
        let (loss, parts) = sample_graph(model, &mut g, &mut b, leaf, s, e, beta, w)?;
        let grads = g.backward(loss)?;
        b.accumulate(&grads, &mut acc);
        if let Some(d) = grads.get(leaf) {
            for (a, x) in g1_seed.iter_mut().zip(d) {
                *a += x;
            }
        }
        sum.total += parts.total;
        sum.reconstruction += parts.reconstruction;
        sum.kl += parts.kl;
    }
    let grads = g1_graph.backward_from(g1, &g1_seed)?;
    g1_bind.accumulate(&grads, &mut acc);
    Ok((sum, acc))
}

fn beta_at(cfg: &TrainConfig, step: u64, total: u64) -> f64 {
    let warm = (cfg.warmup * total as f64).ceil();
    if warm <= 0.0 {
        cfg.beta
    } else {
        cfg.beta * ((step as f64 + 1.0) / warm).min(1.0)
    }
}

pub fn train(
    model: &mut Model,
    x1: &StaticInput,
    data: &[PreparedSample],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if cfg.batch == 0 {
        return Err(ModelError::Config("batch size must be positive".into()));
    }
    if let Some(bad) = data.iter().find(|s| s.y.len() != model.config.horizon) {
        return Err(ModelError::Config(format!(
            "sample has {} labels, model horizon {}",
            bad.y.len(),
            model.config.horizon
        )));
    }
    let opt_cfg = if cfg.sgd {
        OptimizerConfig::sgd(cfg.lr)
    } else {
        OptimizerConfig::adam(cfg.lr)
    };
    let mut opt = Optimizer::new(opt_cfg, &model.params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let per_epoch = data.len().div_ceil(cfg.batch) as u64;
    let total = per_epoch * cfg.epochs as u64;
    let latent = if model.config.latent {
        model.config.latent_dim
    } else {
        0
    };
    let mut report = TrainReport {
        loss: Vec::new(),
        reconstruction: Vec::new(),
        kl: Vec::new(),
        steps: 0,
    };
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut lt, mut lr, mut lk) = (0.0, 0.0, 0.0);
        for chunk in order.chunks(cfg.batch) {
            let batch: Vec<&PreparedSample> = chunk.iter().map(|&i| &data[i]).collect();
            let eps: Vec<Vec<f64>> = batch.iter().map(|_| draw_eps(&mut rng, latent)).collect();
            let beta = beta_at(cfg, report.steps, total);
            let (parts, mut grads) = batch_gradients(model, x1, &batch, &eps, beta, cfg.weights)?;
            if !parts.total.is_finite() || !grads.all_finite() {
                return Err(ModelError::Diverged {
                    step: report.steps,
                    loss: parts.total,
                });
            }
            grads.scale(1.0 / batch.len() as f64);
            let norm = grads.global_norm();
            if cfg.clip_norm > 0.0 && norm > cfg.clip_norm {
                grads.scale(cfg.clip_norm / norm);
            }
            opt.step(&mut model.params, &grads)?;
            if !model.params.all_finite() {
                return Err(ModelError::Diverged {
                    step: report.steps,
                    loss: parts.total,
                });
            }
            report.steps += 1;
            lt += parts.total;
            lr += parts.reconstruction;
            lk += parts.kl;
        }
        let n = data.len() as f64;
        log::info!(
            "epoch {epoch}: loss {:.4} recon {:.4} kl {:.4}",
            lt / n,
            lr / n,
            lk / n
        );
        report.loss.push(lt / n);
        report.reconstruction.push(lr / n);
        report.kl.push(lk / n);
    }
    Ok(report)
}
