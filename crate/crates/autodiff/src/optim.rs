//! First-order parameter updates.

use serde::{Deserialize, Serialize};

use crate::{AutodiffError, ParamGrads, ParamSet, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    /// `p -= lr * (g + momentum * velocity)`, heavy-ball momentum.
    Sgd { lr: f64, momentum: f64 },
    /// Adaptive moments with bias correction.
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl OptimizerConfig {
    pub fn sgd(lr: f64) -> Self {
        OptimizerConfig::Sgd { lr, momentum: 0.0 }
    }

    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerConfig::Sgd { lr, .. } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimizer {
    config: OptimizerConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, params: &ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> = (0..params.len())
            .map(|i| vec![0.0; params.tensor(i).len()])
            .collect();
        let second = match config {
            OptimizerConfig::Adam { .. } => zeros.clone(),
            OptimizerConfig::Sgd { .. } => Vec::new(),
        };
        Optimizer {
            config,
            first: zeros,
            second,
            steps: 0,
        }
    }

    pub fn config(&self) -> OptimizerConfig {
        self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update. Every parameter must have a gradient.
    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamGrads) -> Result<()> {
        if grads.len() != params.len() {
            return Err(AutodiffError::Invalid {
                op: "optimizer_step",
                reason: format!("{} gradients for {} parameters", grads.len(), params.len()),
            });
        }
        for i in 0..params.len() {
            if grads.get(i).is_none() {
                return Err(AutodiffError::MissingGradient(params.name(i).to_string()));
            }
        }
        self.steps += 1;
        let t = self.steps as f64;
        for i in 0..params.len() {
            let g = grads.get(i).expect("checked above");
            let p = params.tensor_mut(i).values_mut();
            match self.config {
                OptimizerConfig::Sgd { lr, momentum } => {
                    let vel = &mut self.first[i];
                    for k in 0..p.len() {
                        if momentum == 0.0 {
                            p[k] -= lr * g[k];
                        } else {
                            vel[k] = momentum * vel[k] + g[k];
                            p[k] -= lr * vel[k];
                        }
                    }
                }
                OptimizerConfig::Adam {
                    lr,
                    beta1,
                    beta2,
                    eps,
                } => {
                    let m = &mut self.first[i];
                    let v = &mut self.second[i];
                    let c1 = 1.0 - beta1.powf(t);
                    let c2 = 1.0 - beta2.powf(t);
                    for k in 0..p.len() {
                        m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                        v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                        let mh = m[k] / c1;
                        let vh = v[k] / c2;
                        p[k] -= lr * mh / (vh.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Tensor;

    fn single(v: f64) -> ParamSet {
        let mut p = ParamSet::new();
        p.insert("w", Tensor::scalar(v)).unwrap();
        p
    }

    fn grad_of(p: &ParamSet, g: f64) -> ParamGrads {
        let mut gr = ParamGrads::empty(p);
        gr.set(0, vec![g]);
        gr
    }

    #[test]
    fn plain_step() {
        let mut p = single(1.0);
        let mut opt = Optimizer::new(OptimizerConfig::sgd(0.1), &p);
        {
            let gr = grad_of(&p, 2.0);
            opt.step(&mut p, &gr).unwrap();
        }
        assert!((p.tensor(0).item() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        for cfg in [OptimizerConfig::sgd(0.1), OptimizerConfig::adam(0.1)] {
            let mut p = single(1.25);
            let mut opt = Optimizer::new(cfg, &p);
            for _ in 0..5 {
                {
                    let gr = grad_of(&p, 0.0);
                    opt.step(&mut p, &gr).unwrap();
                }
            }
            assert_eq!(p.tensor(0).item(), 1.25);
        }
    }

    #[test]
    fn gradient_descent_converges_on_quadratic() {
        // f(w) = (w - 3)^2: error shrinks by 0.8 per step, 0.8^100 ~ 2e-10.
        let mut p = single(0.0);
        let mut opt = Optimizer::new(OptimizerConfig::sgd(0.1), &p);
        for _ in 0..100 {
            let w = p.tensor(0).item();
            {
                let gr = grad_of(&p, 2.0 * (w - 3.0));
                opt.step(&mut p, &gr).unwrap();
            }
        }
        assert!((p.tensor(0).item() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn adam_moves_toward_minimum() {
        let mut p = single(0.0);
        let mut opt = Optimizer::new(OptimizerConfig::adam(0.05), &p);
        for _ in 0..2000 {
            let w = p.tensor(0).item();
            {
                let gr = grad_of(&p, 2.0 * (w - 3.0));
                opt.step(&mut p, &gr).unwrap();
            }
        }
        assert!((p.tensor(0).item() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let mut p = single(0.0);
        let mut opt = Optimizer::new(OptimizerConfig::sgd(0.1), &p);
        let err = opt
            .step(&mut p, &ParamGrads::empty(&single(0.0)))
            .unwrap_err();
        assert!(matches!(err, AutodiffError::MissingGradient(name) if name == "w"));
    }
}
