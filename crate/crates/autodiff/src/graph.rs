use crate::{AutodiffError, Result, Tensor};

/// Handle to a node recorded in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    MatVec {
        weight: Var,
        input: Var,
    },
    Conv2d {
        input: Var,
        kernel: Var,
        bias: Var,
        stride: usize,
    },
    Tanh(Var),
    Sigmoid(Var),
    Relu(Var),
    Softplus(Var),
    Exp(Var),
    Square(Var),
    WrapDegrees(Var),
    Concat(Vec<Var>),
    Slice {
        input: Var,
        start: usize,
    },
    Reshape(Var),
    Sum(Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Tape of operations recorded during one forward pass.
///
/// Nodes are appended in evaluation order, so every input id precedes its
/// consumer and the tape is acyclic by construction.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient buffer for `var`, `None` when the node does not require
    /// gradients or is not upstream of the differentiated output.
    pub fn get(&self, var: Var) -> Option<&[f64]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }

    pub fn take(&mut self, var: Var) -> Option<Vec<f64>> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Input that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Input whose gradient is reported by [`Graph::backward`].
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn values(&self, var: Var) -> &[f64] {
        self.nodes[var.0].value.values()
    }

    pub fn shape(&self, var: Var) -> &[usize] {
        self.nodes[var.0].value.shape()
    }

    pub fn requires_grad(&self, var: Var) -> bool {
        self.nodes[var.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(AutodiffError::shape(op, self.shape(a), self.shape(b)));
        }
        Ok(())
    }

    fn unary(&mut self, input: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let src = &self.nodes[input.0].value;
        let values = src.values().iter().map(|&x| f(x)).collect();
        let value = Tensor::new(src.shape().to_vec(), values).expect("shape preserved");
        let rg = self.nodes[input.0].requires_grad;
        self.push(value, op, rg)
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var> {
        self.same_shape(name, a, b)?;
        let va = self.nodes[a.0].value.values();
        let vb = self.nodes[b.0].value.values();
        let values = va.iter().zip(vb).map(|(&x, &y)| f(x, y)).collect();
        let value = Tensor::new(self.shape(a).to_vec(), values)?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, Op::Sub(a, b), |x, y| x - y)
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        self.unary(a, Op::Scale(a, factor), |x| x * factor)
    }

    pub fn offset(&mut self, a: Var, shift: f64) -> Var {
        self.unary(a, Op::Offset(a), |x| x + shift)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Op::Tanh(a), f64::tanh)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, Op::Relu(a), |x| x.max(0.0))
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, Op::Softplus(a), softplus)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, Op::Exp(a), f64::exp)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, Op::Square(a), |x| x * x)
    }

    /// Wraps angle differences in degrees into `[-180, 180)`. The gradient is
    /// the identity almost everywhere.
    pub fn wrap_degrees(&mut self, a: Var) -> Var {
        self.unary(a, Op::WrapDegrees(a), wrap_degrees)
    }

    /// Matrix-vector product `weight [m, n] x input [n] -> [m]`.
    pub fn matvec(&mut self, weight: Var, input: Var) -> Result<Var> {
        let ws = self.shape(weight).to_vec();
        let xs = self.shape(input).to_vec();
        if ws.len() != 2 {
            return Err(AutodiffError::Invalid {
                op: "matvec",
                reason: format!("weight must be 2-d, got {ws:?}"),
            });
        }
        if xs.len() != 1 || xs[0] != ws[1] {
            return Err(AutodiffError::shape("matvec", &[ws[1]], &xs));
        }
        let (m, n) = (ws[0], ws[1]);
        let w = self.values(weight);
        let x = self.values(input);
        let out: Vec<f64> = (0..m).map(|r| dot(&w[r * n..(r + 1) * n], x)).collect();
        let rg = self.any_grad(&[weight, input]);
        Ok(self.push(Tensor::new(vec![m], out)?, Op::MatVec { weight, input }, rg))
    }

    /// Valid (unpadded) 2-d convolution of `input [C, H, W]` with
    /// `kernel [K, C, kh, kw]` plus `bias [K]`.
    pub fn conv2d(&mut self, input: Var, kernel: Var, bias: Var, stride: usize) -> Result<Var> {
        let is = self.shape(input).to_vec();
        let ks = self.shape(kernel).to_vec();
        let bs = self.shape(bias).to_vec();
        if is.len() != 3 {
            return Err(AutodiffError::Invalid {
                op: "conv2d",
                reason: format!("input must be [C, H, W], got {is:?}"),
            });
        }
        if ks.len() != 4 || ks[1] != is[0] {
            return Err(AutodiffError::shape("conv2d", &[ks[0], is[0], 3, 3], &ks));
        }
        if bs != [ks[0]] {
            return Err(AutodiffError::shape("conv2d", &[ks[0]], &bs));
        }
        if stride == 0 {
            return Err(AutodiffError::Invalid {
                op: "conv2d",
                reason: "stride must be positive".into(),
            });
        }
        let geom = ConvGeom::new(&is, &ks, stride)?;
        let x = self.values(input);
        let w = self.values(kernel);
        let b = self.values(bias);
        let mut out = vec![0.0; geom.k * geom.ho * geom.wo];
        for k in 0..geom.k {
            out[k * geom.ho * geom.wo..(k + 1) * geom.ho * geom.wo].fill(b[k]);
        }
        let nnz = x.iter().filter(|v| **v != 0.0).count();
        if nnz * 4 < x.len() {
            geom.forward_sparse(x, w, &mut out);
        } else {
            geom.forward_dense(x, w, &mut out);
        }
        let rg = self.any_grad(&[input, kernel, bias]);
        let value = Tensor::new(vec![geom.k, geom.ho, geom.wo], out)?;
        Ok(self.push(
            value,
            Op::Conv2d {
                input,
                kernel,
                bias,
                stride,
            },
            rg,
        ))
    }

    /// Concatenates the flattened values of `parts` into one vector.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(AutodiffError::Invalid {
                op: "concat",
                reason: "nothing to concatenate".into(),
            });
        }
        let mut values = Vec::new();
        for p in parts {
            values.extend_from_slice(self.values(*p));
        }
        let rg = self.any_grad(parts);
        let n = values.len();
        Ok(self.push(
            Tensor::new(vec![n], values)?,
            Op::Concat(parts.to_vec()),
            rg,
        ))
    }

    /// Contiguous range `[start, start + len)` of the flattened input.
    pub fn slice(&mut self, input: Var, start: usize, len: usize) -> Result<Var> {
        let total = self.value(input).len();
        if len == 0 || start + len > total {
            return Err(AutodiffError::Invalid {
                op: "slice",
                reason: format!("range {start}..{} out of bounds for {total}", start + len),
            });
        }
        let values = self.values(input)[start..start + len].to_vec();
        let rg = self.requires_grad(input);
        Ok(self.push(
            Tensor::new(vec![len], values)?,
            Op::Slice { input, start },
            rg,
        ))
    }

    pub fn reshape(&mut self, input: Var, shape: Vec<usize>) -> Result<Var> {
        let value = self.value(input).clone().reshaped(shape)?;
        let rg = self.requires_grad(input);
        Ok(self.push(value, Op::Reshape(input), rg))
    }

    pub fn flatten(&mut self, input: Var) -> Result<Var> {
        let n = self.value(input).len();
        self.reshape(input, vec![n])
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, input: Var) -> Var {
        let s = self.values(input).iter().sum();
        let rg = self.requires_grad(input);
        self.push(Tensor::scalar(s), Op::Sum(input), rg)
    }

    /// Reverse pass from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let value = self.value(loss);
        if !value.is_scalar() {
            return Err(AutodiffError::NonScalarBackward(value.shape().to_vec()));
        }
        self.backward_from(loss, &[1.0])
    }

    /// Reverse pass seeded with an explicit upstream gradient for `output`.
    ///
    /// Used to push gradients accumulated elsewhere (for example from many
    /// per-sample graphs that consumed a shared feature vector) back through
    /// the graph that produced `output`.
    pub fn backward_from(&self, output: Var, seed: &[f64]) -> Result<Gradients> {
        let n_out = self.value(output).len();
        if seed.len() != n_out {
            return Err(AutodiffError::shape(
                "backward_from",
                &[n_out],
                &[seed.len()],
            ));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(seed.to_vec());
        for idx in (0..=output.0).rev() {
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else {
                continue;
            };
            self.propagate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.acc(grads, *a, |d| axpy(d, g, 1.0));
                self.acc(grads, *b, |d| axpy(d, g, 1.0));
            }
            Op::Sub(a, b) => {
                self.acc(grads, *a, |d| axpy(d, g, 1.0));
                self.acc(grads, *b, |d| axpy(d, g, -1.0));
            }
            Op::Mul(a, b) => {
                let va = self.values(*a);
                let vb = self.values(*b);
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * vb[i];
                    }
                });
                self.acc(grads, *b, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * va[i];
                    }
                });
            }
            Op::Scale(a, f) => self.acc(grads, *a, |d| axpy(d, g, *f)),
            Op::Offset(a) | Op::WrapDegrees(a) | Op::Reshape(a) => {
                self.acc(grads, *a, |d| axpy(d, g, 1.0))
            }
            Op::Tanh(a) => {
                let y = node.value.values();
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * (1.0 - y[i] * y[i]);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let y = node.value.values();
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * y[i] * (1.0 - y[i]);
                    }
                });
            }
            Op::Relu(a) => {
                let x = self.values(*a);
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        if x[i] > 0.0 {
                            d[i] += g[i];
                        }
                    }
                });
            }
            Op::Softplus(a) => {
                let x = self.values(*a);
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * sigmoid(x[i]);
                    }
                });
            }
            Op::Exp(a) => {
                let y = node.value.values();
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * y[i];
                    }
                });
            }
            Op::Square(a) => {
                let x = self.values(*a);
                self.acc(grads, *a, |d| {
                    for i in 0..d.len() {
                        d[i] += 2.0 * g[i] * x[i];
                    }
                });
            }
            Op::MatVec { weight, input } => {
                let ws = self.shape(*weight);
                let (m, n) = (ws[0], ws[1]);
                let w = self.values(*weight);
                let x = self.values(*input);
                self.acc(grads, *weight, |d| {
                    for r in 0..m {
                        if g[r] != 0.0 {
                            axpy(&mut d[r * n..(r + 1) * n], x, g[r]);
                        }
                    }
                });
                self.acc(grads, *input, |d| {
                    for r in 0..m {
                        if g[r] != 0.0 {
                            axpy(d, &w[r * n..(r + 1) * n], g[r]);
                        }
                    }
                });
            }
            Op::Conv2d {
                input,
                kernel,
                bias,
                stride,
            } => {
                let geom = ConvGeom::new(self.shape(*input), self.shape(*kernel), *stride)
                    .expect("validated in forward");
                let x = self.values(*input);
                let w = self.values(*kernel);
                let plane = geom.ho * geom.wo;
                self.acc(grads, *bias, |d| {
                    for k in 0..geom.k {
                        d[k] += g[k * plane..(k + 1) * plane].iter().sum::<f64>();
                    }
                });
                self.acc(grads, *kernel, |d| {
                    let nnz = x.iter().filter(|v| **v != 0.0).count();
                    if nnz * 4 < x.len() {
                        geom.kernel_grad_sparse(x, g, d);
                    } else {
                        geom.kernel_grad_dense(x, g, d);
                    }
                });
                self.acc(grads, *input, |d| geom.input_grad(w, g, d));
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for p in parts {
                    let len = self.value(*p).len();
                    self.acc(grads, *p, |d| axpy(d, &g[offset..offset + len], 1.0));
                    offset += len;
                }
            }
            Op::Slice { input, start } => {
                let start = *start;
                self.acc(grads, *input, |d| {
                    axpy(&mut d[start..start + g.len()], g, 1.0)
                });
            }
            Op::Sum(a) => {
                let s = g[0];
                self.acc(grads, *a, |d| d.iter_mut().for_each(|v| *v += s));
            }
        }
    }

    fn acc(&self, grads: &mut [Option<Vec<f64>>], target: Var, f: impl FnOnce(&mut [f64])) {
        if !self.nodes[target.0].requires_grad {
            return;
        }
        let len = self.nodes[target.0].value.len();
        let buf = grads[target.0].get_or_insert_with(|| vec![0.0; len]);
        f(buf);
    }
}

#[derive(Clone, Copy, Debug)]
struct ConvGeom {
    c: usize,
    h: usize,
    w: usize,
    k: usize,
    kh: usize,
    kw: usize,
    ho: usize,
    wo: usize,
    stride: usize,
}

impl ConvGeom {
    fn new(input: &[usize], kernel: &[usize], stride: usize) -> Result<Self> {
        let (c, h, w) = (input[0], input[1], input[2]);
        let (k, kh, kw) = (kernel[0], kernel[2], kernel[3]);
        if h < kh || w < kw {
            return Err(AutodiffError::Invalid {
                op: "conv2d",
                reason: format!("input {h}x{w} smaller than kernel {kh}x{kw}"),
            });
        }
        Ok(ConvGeom {
            c,
            h,
            w,
            k,
            kh,
            kw,
            ho: (h - kh) / stride + 1,
            wo: (w - kw) / stride + 1,
            stride,
        })
    }

    fn kidx(&self, k: usize, c: usize, di: usize, dj: usize) -> usize {
        ((k * self.c + c) * self.kh + di) * self.kw + dj
    }

    fn forward_dense(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        let s = self.stride;
        for k in 0..self.k {
            for c in 0..self.c {
                for di in 0..self.kh {
                    for dj in 0..self.kw {
                        let wv = w[self.kidx(k, c, di, dj)];
                        if wv == 0.0 {
                            continue;
                        }
                        for i in 0..self.ho {
                            let row = &x[(c * self.h + i * s + di) * self.w..];
                            let o = &mut out
                                [(k * self.ho + i) * self.wo..(k * self.ho + i + 1) * self.wo];
                            for (j, ov) in o.iter_mut().enumerate() {
                                *ov += wv * row[j * s + dj];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Output positions `(i, j, di, dj)` touched by input cell `(y, x)`.
    fn for_each_tap(&self, y: usize, x: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
        let s = self.stride;
        for di in 0..self.kh.min(y + 1) {
            let yy = y - di;
            if yy % s != 0 || yy / s >= self.ho {
                continue;
            }
            for dj in 0..self.kw.min(x + 1) {
                let xx = x - dj;
                if xx % s != 0 || xx / s >= self.wo {
                    continue;
                }
                f(yy / s, xx / s, di, dj);
            }
        }
    }

    fn forward_sparse(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        for c in 0..self.c {
            for y in 0..self.h {
                for xi in 0..self.w {
                    let v = x[(c * self.h + y) * self.w + xi];
                    if v == 0.0 {
                        continue;
                    }
                    self.for_each_tap(y, xi, |i, j, di, dj| {
                        for k in 0..self.k {
                            out[(k * self.ho + i) * self.wo + j] += v * w[self.kidx(k, c, di, dj)];
                        }
                    });
                }
            }
        }
    }

    fn kernel_grad_dense(&self, x: &[f64], g: &[f64], d: &mut [f64]) {
        let s = self.stride;
        for k in 0..self.k {
            for c in 0..self.c {
                for di in 0..self.kh {
                    for dj in 0..self.kw {
                        let mut acc = 0.0;
                        for i in 0..self.ho {
                            let row = &x[(c * self.h + i * s + di) * self.w..];
                            let go =
                                &g[(k * self.ho + i) * self.wo..(k * self.ho + i + 1) * self.wo];
                            for (j, gv) in go.iter().enumerate() {
                                acc += gv * row[j * s + dj];
                            }
                        }
                        d[self.kidx(k, c, di, dj)] += acc;
                    }
                }
            }
        }
    }

    fn kernel_grad_sparse(&self, x: &[f64], g: &[f64], d: &mut [f64]) {
        for c in 0..self.c {
            for y in 0..self.h {
                for xi in 0..self.w {
                    let v = x[(c * self.h + y) * self.w + xi];
                    if v == 0.0 {
                        continue;
                    }
                    self.for_each_tap(y, xi, |i, j, di, dj| {
                        for k in 0..self.k {
                            d[self.kidx(k, c, di, dj)] += v * g[(k * self.ho + i) * self.wo + j];
                        }
                    });
                }
            }
        }
    }

    fn input_grad(&self, w: &[f64], g: &[f64], d: &mut [f64]) {
        let s = self.stride;
        for k in 0..self.k {
            for c in 0..self.c {
                for di in 0..self.kh {
                    for dj in 0..self.kw {
                        let wv = w[self.kidx(k, c, di, dj)];
                        if wv == 0.0 {
                            continue;
                        }
                        for i in 0..self.ho {
                            let go =
                                &g[(k * self.ho + i) * self.wo..(k * self.ho + i + 1) * self.wo];
                            let base = (c * self.h + i * s + di) * self.w + dj;
                            for (j, gv) in go.iter().enumerate() {
                                d[base + j * s] += wv * gv;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(dst: &mut [f64], src: &[f64], alpha: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.max(0.0) + (-x.abs()).exp().ln_1p()
    }
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub(crate) fn wrap_degrees(d: f64) -> f64 {
    let r = (d + 180.0).rem_euclid(360.0) - 180.0;
    if r >= 180.0 {
        r - 360.0
    } else {
        r
    }
}
