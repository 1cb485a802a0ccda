//! Layer-level building blocks on top of [`Graph`] primitives.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{AutodiffError, Graph, Result, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, g: &mut Graph, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Tanh => g.tanh(x),
            Activation::Relu => g.relu(x),
            Activation::Sigmoid => g.sigmoid(x),
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
        }
    }
}

/// `activation(weight · x + bias)` for `weight [m, n]`, `x [n]`, `bias [m]`.
pub fn dense(g: &mut Graph, x: Var, weight: Var, bias: Var, activation: Activation) -> Result<Var> {
    let ws = g.shape(weight).to_vec();
    if ws.len() != 2 {
        return Err(AutodiffError::Invalid {
            op: "dense",
            reason: format!("weight must be 2-d, got {ws:?}"),
        });
    }
    if g.shape(bias) != [ws[0]] {
        return Err(AutodiffError::shape("dense", &[ws[0]], g.shape(bias)));
    }
    let wx = g.matvec(weight, x)?;
    let z = g.add(wx, bias)?;
    Ok(activation.apply(g, z))
}

/// 3×3-style valid convolution restricted to the strides the network uses.
pub fn conv2d(g: &mut Graph, input: Var, kernel: Var, bias: Var, stride: usize) -> Result<Var> {
    if !(1..=2).contains(&stride) {
        return Err(AutodiffError::Invalid {
            op: "conv2d",
            reason: format!("stride {stride} not in {{1, 2}}"),
        });
    }
    g.conv2d(input, kernel, bias, stride)
}

/// Gate parameters of one LSTM cell. Rows are stacked in the order
/// input, forget, candidate, output.
#[derive(Clone, Copy, Debug)]
pub struct LstmWeights {
    /// `[4m, n]`
    pub w_ih: Var,
    /// `[4m, m]`
    pub w_hh: Var,
    /// `[4m]`
    pub bias: Var,
}

/// One LSTM cell update, returning `(h', c')`.
pub fn lstm_step(g: &mut Graph, x: Var, h: Var, c: Var, p: &LstmWeights) -> Result<(Var, Var)> {
    let m = g.value(h).len();
    if g.value(c).len() != m {
        return Err(AutodiffError::shape("lstm_step", &[m], g.shape(c)));
    }
    let ws = g.shape(p.w_hh).to_vec();
    if ws != [4 * m, m] {
        return Err(AutodiffError::shape("lstm_step", &[4 * m, m], &ws));
    }
    let ih = g.matvec(p.w_ih, x)?;
    if g.value(ih).len() != 4 * m {
        return Err(AutodiffError::shape("lstm_step", &[4 * m], g.shape(ih)));
    }
    let hh = g.matvec(p.w_hh, h)?;
    let pre = g.add(ih, hh)?;
    let pre = g.add(pre, p.bias)?;
    let i = g.slice(pre, 0, m)?;
    let f = g.slice(pre, m, m)?;
    let cand = g.slice(pre, 2 * m, m)?;
    let o = g.slice(pre, 3 * m, m)?;
    let i = g.sigmoid(i);
    let f = g.sigmoid(f);
    let cand = g.tanh(cand);
    let o = g.sigmoid(o);
    let fc = g.mul(f, c)?;
    let ic = g.mul(i, cand)?;
    let c_next = g.add(fc, ic)?;
    let tc = g.tanh(c_next);
    let h_next = g.mul(o, tc)?;
    Ok((h_next, c_next))
}

/// Uniform initialisation in `±1/sqrt(fan_in)`.
pub fn init_uniform<R: Rng + ?Sized>(shape: &[usize], fan_in: usize, rng: &mut R) -> Tensor {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    let n: usize = shape.iter().product();
    let values = (0..n).map(|_| rng.random_range(-bound..bound)).collect();
    Tensor::new(shape.to_vec(), values).expect("shape matches count")
}

pub fn sigmoid(x: f64) -> f64 {
    crate::graph::sigmoid(x)
}

pub fn softplus(x: f64) -> f64 {
    crate::graph::softplus(x)
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_degrees(d: f64) -> f64 {
    crate::graph::wrap_degrees(d)
}
