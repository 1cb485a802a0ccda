//! Grouping of sampled futures by final heading.

use maip_autodiff::nn::wrap_degrees;
use maip_model::PredictionSample;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

pub const MODE_RADIUS_DEG: f64 = 15.0;
pub const MIN_MODE_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modes {
    pub count: usize,
    /// Cluster index per sample.
    pub assignment: Vec<usize>,
    /// Final heading of each cluster's seed sample.
    pub centers: Vec<f64>,
}

/// Final heading of a dead-reckoned sample.
pub fn final_heading(s: &PredictionSample) -> f64 {
    s.steps.last().map_or(0.0, |p| wrap_degrees(p.1))
}

/// Fixed-radius agglomeration: repeatedly take the unassigned heading with
/// the most unassigned neighbours within `radius` (ties to the lowest index)
/// and make it and those neighbours one cluster.
pub fn cluster_headings(headings: &[f64], radius: f64) -> Modes {
    let n = headings.len();
    let close = |a: f64, b: f64| wrap_degrees(a - b).abs() <= radius;
    let mut assignment = vec![usize::MAX; n];
    let mut centers = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in (0..n).filter(|&i| assignment[i] == usize::MAX) {
            let c = (0..n)
                .filter(|&j| assignment[j] == usize::MAX && close(headings[i], headings[j]))
                .count();
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((i, c));
            }
        }
        let Some((seed, _)) = best else { break };
        let id = centers.len();
        for j in 0..n {
            if assignment[j] == usize::MAX && close(headings[seed], headings[j]) {
                assignment[j] = id;
            }
        }
        centers.push(headings[seed]);
    }
    Modes {
        count: centers.len(),
        assignment,
        centers,
    }
}

pub fn cluster_modes(samples: &[PredictionSample]) -> Result<Modes> {
    if samples.len() < MIN_MODE_SAMPLES {
        return Err(EvalError::TooFewSamples {
            need: MIN_MODE_SAMPLES,
            got: samples.len(),
        });
    }
    let headings: Vec<f64> = samples.iter().map(final_heading).collect();
    Ok(cluster_headings(&headings, MODE_RADIUS_DEG))
}
