//! Central finite-difference comparison against analytic gradients.

use crate::{ParamGrads, ParamSet};

/// Denominator floor for the relative error; gradients below this magnitude
/// are compared absolutely.
pub const REL_ERR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradMismatch {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_err: f64,
    pub failures: Vec<GradMismatch>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

/// Perturbs every parameter value by `±step` and compares the central
/// difference of `loss` with `analytic`. `loss` must be a pure function of
/// the parameters (fixed inputs, fixed noise).
pub fn check_params(
    params: &ParamSet,
    analytic: &ParamGrads,
    step: f64,
    tolerance: f64,
    mut loss: impl FnMut(&ParamSet) -> f64,
) -> GradCheckReport {
    let mut work = params.clone();
    let mut report = GradCheckReport::default();
    for i in 0..params.len() {
        let n = params.tensor(i).len();
        for k in 0..n {
            let orig = params.tensor(i).values()[k];
            work.tensor_mut(i).values_mut()[k] = orig + step;
            let up = loss(&work);
            work.tensor_mut(i).values_mut()[k] = orig - step;
            let down = loss(&work);
            work.tensor_mut(i).values_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic.get(i).map_or(0.0, |g| g[k]);
            let rel = relative_error(a, numeric);
            report.checked += 1;
            report.max_rel_err = report.max_rel_err.max(rel);
            if !(rel < tolerance) {
                report.failures.push(GradMismatch {
                    param: params.name(i).to_string(),
                    index: k,
                    analytic: a,
                    numeric,
                    rel_err: rel,
                });
            }
        }
    }
    report
}
