use std::collections::HashMap;

use crate::{AutodiffError, Gradients, Graph, Result, Tensor, Var};

/// Ordered collection of named trainable tensors.
#[derive(Clone, Debug, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
}

impl PartialEq for ParamSet {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.tensors == other.tensors
    }
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(AutodiffError::Invalid {
                op: "ParamSet::insert",
                reason: format!("duplicate parameter `{name}`"),
            });
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.tensors.push(tensor);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Total number of scalar values across all tensors.
    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index_of(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index_of(name).map(move |i| &mut self.tensors[i])
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn tensor(&self, i: usize) -> &Tensor {
        &self.tensors[i]
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut Tensor {
        &mut self.tensors[i]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::all_finite)
    }

    /// Bitwise equality of every value, used by determinism checks.
    pub fn bitwise_eq(&self, other: &ParamSet) -> bool {
        self.names == other.names
            && self.tensors.iter().zip(&other.tensors).all(|(a, b)| {
                a.shape() == b.shape()
                    && a.values()
                        .iter()
                        .zip(b.values())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }

    /// Parameters whose names start with `prefix`, with the prefix removed.
    pub fn with_prefix_stripped(&self, prefix: &str) -> ParamSet {
        let mut out = ParamSet::new();
        for (name, t) in self.iter() {
            if let Some(rest) = name.strip_prefix(prefix) {
                out.insert(rest, t.clone()).expect("names unique");
            }
        }
        out
    }
}

/// Lazily creates graph leaves for the parameters a forward pass touches.
pub struct ParamBinding<'a> {
    set: &'a ParamSet,
    vars: Vec<Option<Var>>,
    trainable: bool,
}

impl<'a> ParamBinding<'a> {
    /// Leaves that receive gradients.
    pub fn trainable(set: &'a ParamSet) -> Self {
        ParamBinding {
            set,
            vars: vec![None; set.len()],
            trainable: true,
        }
    }

    /// Constant leaves for inference.
    pub fn frozen(set: &'a ParamSet) -> Self {
        ParamBinding {
            trainable: false,
            ..Self::trainable(set)
        }
    }

    pub fn params(&self) -> &'a ParamSet {
        self.set
    }

    pub fn var(&mut self, g: &mut Graph, name: &str) -> Result<Var> {
        let i = self
            .set
            .index_of(name)
            .ok_or_else(|| AutodiffError::UnknownParam(name.to_string()))?;
        if let Some(v) = self.vars[i] {
            return Ok(v);
        }
        let t = self.set.tensor(i).clone();
        let v = if self.trainable {
            g.leaf(t)
        } else {
            g.constant(t)
        };
        self.vars[i] = Some(v);
        Ok(v)
    }

    /// Adds this binding's parameter gradients into `acc`.
    pub fn accumulate(&self, grads: &Gradients, acc: &mut ParamGrads) {
        for (i, v) in self.vars.iter().enumerate() {
            let Some(v) = v else { continue };
            let Some(g) = grads.get(*v) else { continue };
            let slot = acc.grads[i].get_or_insert_with(|| vec![0.0; g.len()]);
            for (a, b) in slot.iter_mut().zip(g) {
                *a += b;
            }
        }
    }
}

/// Per-parameter gradient buffers aligned with a [`ParamSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrads {
    grads: Vec<Option<Vec<f64>>>,
}

impl ParamGrads {
    /// No gradient recorded for any parameter yet.
    pub fn empty(set: &ParamSet) -> Self {
        ParamGrads {
            grads: vec![None; set.len()],
        }
    }

    pub fn zeros(set: &ParamSet) -> Self {
        ParamGrads {
            grads: (0..set.len())
                .map(|i| Some(vec![0.0; set.tensor(i).len()]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.grads.get(i).and_then(|g| g.as_deref())
    }

    pub fn get_mut(&mut self, i: usize) -> Option<&mut Vec<f64>> {
        self.grads.get_mut(i).and_then(Option::as_mut)
    }

    pub fn set(&mut self, i: usize, g: Vec<f64>) {
        self.grads[i] = Some(g);
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.grads.iter_mut().flatten() {
            g.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            let Some(b) = b else { continue };
            let slot = a.get_or_insert_with(|| vec![0.0; b.len()]);
            for (x, y) in slot.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.grads
            .iter()
            .flatten()
            .flat_map(|g| g.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.grads.iter().flatten().flatten().all(|v| v.is_finite())
    }
}
