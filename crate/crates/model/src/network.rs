//! Parameter layout and forward pass.

use maip_autodiff::nn::{self, Activation, LstmWeights};
use maip_autodiff::{Graph, ParamBinding, ParamSet, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ModelConfig, StateEncoder};
use crate::error::{ModelError, Result};
use crate::features::{x4_features, Inputs, StaticInput, X4_FEATURES};

/// Speeds below this are treated as this when anchoring the speed head.
pub const V_FLOOR: f64 = 0.01;

/// Inverse of softplus, `ln(e^v - 1)`.
pub fn softplus_inv(v: f64) -> f64 {
    let v = v.max(V_FLOOR);
    if v > 30.0 {
        v
    } else {
        v.exp_m1().ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParamSet,
}

fn dense_layer(
    ps: &mut ParamSet,
    rng: &mut ChaCha8Rng,
    name: &str,
    inp: usize,
    out: usize,
) -> Result<()> {
    ps.insert(format!("{name}.w"), nn::init_uniform(&[out, inp], inp, rng))?;
    ps.insert(format!("{name}.b"), nn::init_uniform(&[out], inp, rng))?;
    Ok(())
}

fn conv_layer(
    ps: &mut ParamSet,
    rng: &mut ChaCha8Rng,
    name: &str,
    cin: usize,
    cout: usize,
) -> Result<()> {
    let fan = cin * 9;
    ps.insert(
        format!("{name}.w"),
        nn::init_uniform(&[cout, cin, 3, 3], fan, rng),
    )?;
    ps.insert(format!("{name}.b"), nn::init_uniform(&[cout], fan, rng))?;
    Ok(())
}

impl Model {
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ps = ParamSet::new();
        let [c1, c2] = c.conv_channels;
        let feat = c.cnn_features();
        for i in 1..=3 {
            conv_layer(&mut ps, &mut rng, &format!("cnn{i}.conv1"), 1, c1)?;
            conv_layer(&mut ps, &mut rng, &format!("cnn{i}.conv2"), c1, c2)?;
            dense_layer(&mut ps, &mut rng, &format!("fc{i}"), feat, c.branch_width)?;
        }
        match c.state_encoder {
            StateEncoder::Lstm => {
                let (m, n) = (c.lstm_hidden, X4_FEATURES);
                ps.insert("lstm.w_ih", nn::init_uniform(&[4 * m, n], m, &mut rng))?;
                ps.insert("lstm.w_hh", nn::init_uniform(&[4 * m, m], m, &mut rng))?;
                ps.insert("lstm.b", nn::init_uniform(&[4 * m], m, &mut rng))?;
                dense_layer(&mut ps, &mut rng, "fc4", m, c.branch_width)?;
            }
            StateEncoder::Dense => {
                dense_layer(
                    &mut ps,
                    &mut rng,
                    "fc4",
                    c.history * X4_FEATURES,
                    c.branch_width,
                )?;
            }
        }
        dense_layer(&mut ps, &mut rng, "fc5", c.branch_width, c.fuse_width)?;
        let out = 2 * c.horizon;
        if c.latent {
            dense_layer(&mut ps, &mut rng, "enc1", c.fuse_width + out, c.enc_hidden)?;
            dense_layer(&mut ps, &mut rng, "enc2", c.enc_hidden, c.enc_hidden)?;
            dense_layer(&mut ps, &mut rng, "enc_mu", c.enc_hidden, c.latent_dim)?;
            dense_layer(&mut ps, &mut rng, "enc_logvar", c.enc_hidden, c.latent_dim)?;
            dense_layer(
                &mut ps,
                &mut rng,
                "dec1",
                c.latent_dim + c.fuse_width,
                c.dec_hidden,
            )?;
        } else {
            dense_layer(&mut ps, &mut rng, "dec1", c.fuse_width, c.dec_hidden)?;
        }
        dense_layer(&mut ps, &mut rng, "dec2", c.dec_hidden, c.dec_hidden)?;
        dense_layer(&mut ps, &mut rng, "dec_out", c.dec_hidden, out)?;
        Ok(Self { config, params: ps })
    }

    /// Checks that `params` has exactly the layout `config` implies.
    pub fn from_parts(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let template = Self::init(config.clone(), 0)?;
        let names: Vec<&str> = template.params.names().collect();
        let got: Vec<&str> = params.names().collect();
        if names != got {
            return Err(ModelError::Checkpoint(format!(
                "parameter names {got:?} do not match {names:?}"
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if template.params.tensor(i).shape() != params.tensor(i).shape() {
                return Err(ModelError::Checkpoint(format!("shape mismatch for {name}")));
            }
        }
        Ok(Self { config, params })
    }

    pub fn num_values(&self) -> usize {
        self.params.num_values()
    }

    fn dense(
        &self,
        g: &mut Graph,
        b: &mut ParamBinding<'_>,
        name: &str,
        x: Var,
        act: Activation,
    ) -> Result<Var> {
        let w = b.var(g, &format!("{name}.w"))?;
        let bias = b.var(g, &format!("{name}.b"))?;
        Ok(nn::dense(g, x, w, bias, act)?)
    }

    fn cnn(
        &self,
        g: &mut Graph,
        b: &mut ParamBinding<'_>,
        idx: usize,
        values: Vec<f64>,
    ) -> Result<Var> {
        let n = self.config.grid_cells;
        let s = self.config.conv_stride;
        let x = g.constant(Tensor::new(vec![1, n, n], values)?);
        let mut h = x;
        for layer in ["conv1", "conv2"] {
            let w = b.var(g, &format!("cnn{idx}.{layer}.w"))?;
            let bias = b.var(g, &format!("cnn{idx}.{layer}.b"))?;
            let y = nn::conv2d(g, h, w, bias, s)?;
            h = g.tanh(y);
        }
        Ok(g.flatten(h)?)
    }

    /// FC1(CNN1(X1)): the part of the fused features shared by every vehicle.
    pub fn group1(&self, g: &mut Graph, b: &mut ParamBinding<'_>, x1: &StaticInput) -> Result<Var> {
        if x1.cells != self.config.grid_cells {
            return Err(ModelError::Config(format!(
                "static grid has {} cells, model expects {}",
                x1.cells, self.config.grid_cells
            )));
        }
        let f = self.cnn(g, b, 1, x1.values.clone())?;
        self.dense(g, b, "fc1", f, Activation::Tanh)
    }

    /// X_out = tanh(W5 (g1 + FC2(CNN2(X2)) + FC3(CNN3(X3)) + FC4(X4 summary)) + b5).
    pub fn fuse(
        &self,
        g: &mut Graph,
        b: &mut ParamBinding<'_>,
        g1: Var,
        inp: &Inputs<'_>,
    ) -> Result<Var> {
        let c = &self.config;
        if inp.x4.len() != c.history {
            return Err(ModelError::Config(format!(
                "history of {} rows, model expects {}",
                inp.x4.len(),
                c.history
            )));
        }
        if inp.x2.cells != c.grid_cells || inp.x3.cells != c.grid_cells {
            return Err(ModelError::Config(
                "dynamic grid size does not match the model".into(),
            ));
        }
        let f2 = self.cnn(g, b, 2, inp.x2.dynamic_values())?;
        let b2 = self.dense(g, b, "fc2", f2, Activation::Tanh)?;
        let f3 = self.cnn(g, b, 3, inp.x3.dynamic_values())?;
        let b3 = self.dense(g, b, "fc3", f3, Activation::Tanh)?;
        let b4 = match c.state_encoder {
            StateEncoder::Lstm => {
                let p = LstmWeights {
                    w_ih: b.var(g, "lstm.w_ih")?,
                    w_hh: b.var(g, "lstm.w_hh")?,
                    bias: b.var(g, "lstm.b")?,
                };
                let mut h = g.constant(Tensor::zeros(&[c.lstm_hidden]));
                let mut cell = g.constant(Tensor::zeros(&[c.lstm_hidden]));
                for row in inp.x4 {
                    let x = g.constant(Tensor::vector(x4_features(row).to_vec()));
                    (h, cell) = nn::lstm_step(g, x, h, cell, &p)?;
                }
                self.dense(g, b, "fc4", h, Activation::Tanh)?
            }
            StateEncoder::Dense => {
                let flat: Vec<f64> = inp.x4.iter().flat_map(|r| x4_features(r)).collect();
                let x = g.constant(Tensor::vector(flat));
                self.dense(g, b, "fc4", x, Activation::Tanh)?
            }
        };
        let s = g.add(g1, b2)?;
        let s = g.add(s, b3)?;
        let s = g.add(s, b4)?;
        self.dense(g, b, "fc5", s, Activation::Tanh)
    }

    /// Labels as encoder input: change from the anchor in loss units.
    pub fn label_features(&self, y: &[(f64, f64)], anchor: (f64, f64)) -> Vec<f64> {
        let mut out: Vec<f64> = y
            .iter()
            .map(|&(v, _)| (v - anchor.0) / self.config.v_scale)
            .collect();
        out.extend(
            y.iter()
                .map(|&(_, th)| nn::wrap_degrees(th - anchor.1) / self.config.theta_scale),
        );
        out
    }

    /// Posterior (μ, log σ²) from the fused features and the labels.
    pub fn encode(
        &self,
        g: &mut Graph,
        b: &mut ParamBinding<'_>,
        xout: Var,
        y: &[(f64, f64)],
        anchor: (f64, f64),
    ) -> Result<(Var, Var)> {
        if !self.config.latent {
            return Err(ModelError::Usage("model has no latent encoder".into()));
        }
        if y.len() != self.config.horizon {
            return Err(ModelError::Config(format!(
                "{} labels, model horizon {}",
                y.len(),
                self.config.horizon
            )));
        }
        let yv = g.constant(Tensor::vector(self.label_features(y, anchor)));
        let x = g.concat(&[xout, yv])?;
        let h = self.dense(g, b, "enc1", x, Activation::Tanh)?;
        let h = self.dense(g, b, "enc2", h, Activation::Tanh)?;
        let mu = self.dense(g, b, "enc_mu", h, Activation::Identity)?;
        let lv = self.dense(g, b, "enc_logvar", h, Activation::Identity)?;
        Ok((mu, lv))
    }

    /// Decoded (v, θ) sequences, each of length Tp. `z` must be given iff the model has a latent.
    pub fn decode(
        &self,
        g: &mut Graph,
        b: &mut ParamBinding<'_>,
        z: Option<Var>,
        xout: Var,
        anchor: (f64, f64),
    ) -> Result<(Var, Var)> {
        let c = &self.config;
        let x = match (c.latent, z) {
            (true, Some(z)) => g.concat(&[z, xout])?,
            (false, None) => xout,
            _ => {
                return Err(ModelError::Usage(
                    "latent input does not match the model".into(),
                ))
            }
        };
        let h = self.dense(g, b, "dec1", x, Activation::Tanh)?;
        let h = self.dense(g, b, "dec2", h, Activation::Tanh)?;
        let o = self.dense(g, b, "dec_out", h, Activation::Identity)?;
        let ov = g.slice(o, 0, c.horizon)?;
        let ot = g.slice(o, c.horizon, c.horizon)?;
        let ov = g.scale(ov, c.v_scale);
        let ov = g.offset(ov, softplus_inv(anchor.0));
        let v = g.softplus(ov);
        let ot = g.scale(ot, c.theta_scale);
        let th = g.offset(ot, anchor.1);
        Ok((v, th))
    }

    /// Group-1 feature values computed without gradients.
    pub fn group1_values(&self, x1: &StaticInput) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let mut b = ParamBinding::frozen(&self.params);
        let v = self.group1(&mut g, &mut b, x1)?;
        Ok(g.values(v).to_vec())
    }

    /// Fused features X_out as plain values.
    pub fn fuse_features(&self, g1: &[f64], inp: &Inputs<'_>) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let mut b = ParamBinding::frozen(&self.params);
        let g1 = g.constant(Tensor::vector(g1.to_vec()));
        let x = self.fuse(&mut g, &mut b, g1, inp)?;
        Ok(g.values(x).to_vec())
    }

    /// Posterior parameters; only meaningful while training.
    pub fn encode_latent(
        &self,
        xout: &[f64],
        y: &[(f64, f64)],
        anchor: (f64, f64),
        phase: Phase,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if phase == Phase::Test {
            return Err(ModelError::Usage(
                "the encoder is not used at test time; sample z from the prior".into(),
            ));
        }
        let mut g = Graph::new();
        let mut b = ParamBinding::frozen(&self.params);
        let x = g.constant(Tensor::vector(xout.to_vec()));
        let (mu, lv) = self.encode(&mut g, &mut b, x, y, anchor)?;
        Ok((g.values(mu).to_vec(), g.values(lv).to_vec()))
    }

    /// (v, θ) pairs decoded from plain values; θ is wrapped to [-180, 180).
    pub fn decode_values(
        &self,
        z: Option<&[f64]>,
        xout: &[f64],
        anchor: (f64, f64),
    ) -> Result<Vec<(f64, f64)>> {
        let mut g = Graph::new();
        let mut b = ParamBinding::frozen(&self.params);
        let x = g.constant(Tensor::vector(xout.to_vec()));
        let z = z.map(|z| g.constant(Tensor::vector(z.to_vec())));
        let (v, th) = self.decode(&mut g, &mut b, z, x, anchor)?;
        Ok(g.values(v)
            .iter()
            .zip(g.values(th))
            .map(|(&v, &t)| (v, nn::wrap_degrees(t)))
            .collect())
    }
}

/// z = μ + exp(½ log σ²) ⊙ ε.
pub fn reparameterize(mu: &[f64], logvar: &[f64], eps: &[f64]) -> Vec<f64> {
    mu.iter()
        .zip(logvar)
        .zip(eps)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect()
}

pub fn reparameterize_var(g: &mut Graph, mu: Var, logvar: Var, eps: &[f64]) -> Result<Var> {
    let half = g.scale(logvar, 0.5);
    let sd = g.exp(half);
    let e = g.constant(Tensor::vector(eps.to_vec()));
    let noise = g.mul(sd, e)?;
    Ok(g.add(mu, noise)?)
}
