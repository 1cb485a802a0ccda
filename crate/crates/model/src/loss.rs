//! Reconstruction and KL terms, as plain functions and as graph nodes.

use maip_autodiff::nn::wrap_degrees;
use maip_autodiff::{Graph, Tensor, Var};

use crate::config::LossWeights;
use crate::error::Result;

/// KL[N(μ, σ²) ‖ N(0, I)] = ½ Σ (μ² + σ² − 1 − log σ²).
pub fn kl_divergence(mu: &[f64], logvar: &[f64]) -> f64 {
    0.5 * mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| m * m + lv.exp() - 1.0 - lv)
        .sum::<f64>()
}

/// Weighted squared error with θ residuals wrapped before squaring.
pub fn reconstruction(pred: &[(f64, f64)], truth: &[(f64, f64)], w: LossWeights) -> f64 {
    pred.iter()
        .zip(truth)
        .map(|(p, t)| ((p.0 - t.0) / w.v).powi(2) + (wrap_degrees(p.1 - t.1) / w.theta).powi(2))
        .sum()
}

/// ‖Y − Ŷ‖² + β·KL with unit weights.
pub fn loss(
    pred: &[(f64, f64)],
    truth: &[(f64, f64)],
    mu: &[f64],
    logvar: &[f64],
    beta: f64,
) -> f64 {
    loss_weighted(pred, truth, mu, logvar, beta, LossWeights::UNIT)
}

pub fn loss_weighted(
    pred: &[(f64, f64)],
    truth: &[(f64, f64)],
    mu: &[f64],
    logvar: &[f64],
    beta: f64,
    w: LossWeights,
) -> f64 {
    reconstruction(pred, truth, w) + beta * kl_divergence(mu, logvar)
}

pub fn kl_var(g: &mut Graph, mu: Var, logvar: Var) -> Result<Var> {
    let d = g.value(mu).len() as f64;
    let m2 = g.square(mu);
    let s2 = g.exp(logvar);
    let a = g.add(m2, s2)?;
    let a = g.sub(a, logvar)?;
    let s = g.sum(a);
    let s = g.offset(s, -d);
    Ok(g.scale(s, 0.5))
}

pub fn reconstruction_var(
    g: &mut Graph,
    v: Var,
    theta: Var,
    truth: &[(f64, f64)],
    w: LossWeights,
) -> Result<Var> {
    let tv = g.constant(Tensor::vector(truth.iter().map(|p| p.0).collect()));
    let tt = g.constant(Tensor::vector(truth.iter().map(|p| p.1).collect()));
    let dv = g.sub(v, tv)?;
    let dv = g.scale(dv, 1.0 / w.v);
    let dv = g.square(dv);
    let dt = g.sub(theta, tt)?;
    let dt = g.wrap_degrees(dt);
    let dt = g.scale(dt, 1.0 / w.theta);
    let dt = g.square(dt);
    let sv = g.sum(dv);
    let st = g.sum(dt);
    Ok(g.add(sv, st)?)
}
