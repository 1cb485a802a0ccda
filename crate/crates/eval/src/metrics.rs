//! Per-horizon RMSE tables and their CSV form.

use std::io::{BufRead, Write};
use std::path::Path;

use maip_autodiff::nn::wrap_degrees;
use maip_model::PredictionSample;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

pub const CSV_COMMENT: &str =
    "# RMSE over all test samples per horizon; mean and sample std across independent draws per sample; std empty for deterministic methods";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "theta_deg")]
    Theta,
    #[serde(rename = "v_mps")]
    Speed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub horizon_s: f64,
    pub metric: Metric,
    pub mean: f64,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
}

/// Horizon in seconds, rounded to microseconds so 3 × 0.2 prints as 0.6.
pub fn horizon_seconds(step: usize, dt: f64) -> f64 {
    ((step as f64 + 1.0) * dt * 1e6).round() / 1e6
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// RMSE of draw `j` over all samples, per horizon step, for both metrics.
///
/// `draws[i]` holds the predictions for test sample `i`; every sample must
/// have the same number of draws. With `deterministic` the std is omitted.
pub fn rmse_rows(
    method: &str,
    draws: &[Vec<PredictionSample>],
    truth: &[Vec<(f64, f64)>],
    dt: f64,
    deterministic: bool,
) -> Result<Vec<MetricRow>> {
    if draws.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    if draws.len() != truth.len() {
        return Err(EvalError::Mismatch(format!(
            "{} predictions for {} samples",
            draws.len(),
            truth.len()
        )));
    }
    let n = draws[0].len();
    let tp = truth[0].len();
    if n == 0 || draws.iter().any(|d| d.len() != n) {
        return Err(EvalError::Mismatch(
            "every sample needs the same positive number of draws".into(),
        ));
    }
    for (d, t) in draws.iter().zip(truth) {
        if t.len() != tp || d.iter().any(|s| s.steps.len() != tp) {
            return Err(EvalError::Mismatch(
                "prediction length differs from the horizon".into(),
            ));
        }
    }
    let m = draws.len() as f64;
    let mut rows = Vec::new();
    for metric in [Metric::Theta, Metric::Speed] {
        for h in 0..tp {
            let per_draw: Vec<f64> = (0..n)
                .map(|j| {
                    let se: f64 = draws
                        .iter()
                        .zip(truth)
                        .map(|(d, t)| {
                            let (p, y) = (d[j].steps[h], t[h]);
                            match metric {
                                Metric::Theta => wrap_degrees(p.1 - y.1).powi(2),
                                Metric::Speed => (p.0 - y.0).powi(2),
                            }
                        })
                        .sum();
                    (se / m).sqrt()
                })
                .collect();
            let (mean, std) = mean_std(&per_draw);
            rows.push(MetricRow {
                method: method.to_string(),
                horizon_s: horizon_seconds(h, dt),
                metric,
                mean,
                std: (!deterministic).then_some(std),
            });
        }
    }
    Ok(rows)
}

impl MetricTable {
    pub fn extend(&mut self, rows: Vec<MetricRow>) {
        self.rows.extend(rows);
    }

    pub fn get(&self, method: &str, metric: Metric, horizon_s: f64) -> Option<&MetricRow> {
        self.rows.iter().find(|r| {
            r.method == method && r.metric == metric && (r.horizon_s - horizon_s).abs() < 1e-9
        })
    }

    /// Means of one method and metric in horizon order.
    pub fn series(&self, method: &str, metric: Metric) -> Vec<f64> {
        let mut rows: Vec<&MetricRow> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.metric == metric)
            .collect();
        rows.sort_by(|a, b| a.horizon_s.total_cmp(&b.horizon_s));
        rows.iter().map(|r| r.mean).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_COMMENT}").map_err(csv::Error::from)?;
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let rows = rd
            .deserialize()
            .collect::<std::result::Result<Vec<MetricRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
