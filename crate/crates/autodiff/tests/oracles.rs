//! Forward passes against naive reference loops, and every primitive's
//! backward pass against central finite differences.

use maip_autodiff::nn::{self, Activation, LstmWeights};
use maip_autodiff::{Graph, Tensor, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_vals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn rand_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::new(shape.to_vec(), rand_vals(rng, shape.iter().product())).unwrap()
}

fn naive_conv(
    x: &[f64],
    c: usize,
    h: usize,
    w: usize,
    k: &[f64],
    kn: usize,
    b: &[f64],
    s: usize,
) -> Vec<f64> {
    let ho = (h - 3) / s + 1;
    let wo = (w - 3) / s + 1;
    let mut out = vec![0.0; kn * ho * wo];
    for o in 0..kn {
        for i in 0..ho {
            for j in 0..wo {
                let mut acc = b[o];
                for ci in 0..c {
                    for di in 0..3 {
                        for dj in 0..3 {
                            acc += x[(ci * h + i * s + di) * w + j * s + dj]
                                * k[((o * c + ci) * 3 + di) * 3 + dj];
                        }
                    }
                }
                out[(o * ho + i) * wo + j] = acc;
            }
        }
    }
    out
}

#[test]
fn conv_matches_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(c, h, w, kn, s) in &[
        (1, 5, 5, 1, 1),
        (1, 5, 5, 3, 2),
        (2, 7, 6, 4, 1),
        (3, 9, 9, 2, 2),
    ] {
        let x = rand_tensor(&mut rng, &[c, h, w]);
        let k = rand_tensor(&mut rng, &[kn, c, 3, 3]);
        let b = rand_tensor(&mut rng, &[kn]);
        let expected = naive_conv(x.values(), c, h, w, k.values(), kn, b.values(), s);
        let mut g = Graph::new();
        let xv = g.constant(x);
        let kv = g.constant(k);
        let bv = g.constant(b);
        let y = nn::conv2d(&mut g, xv, kv, bv, s).unwrap();
        for (a, e) in g.values(y).iter().zip(&expected) {
            assert!((a - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }
}

#[test]
fn sparse_conv_path_matches_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (c, h, w, kn) = (1, 12, 12, 3);
    let mut xs = vec![0.0; c * h * w];
    for idx in [5usize, 17, 40, 77, 143] {
        xs[idx] = rng.random_range(-1.0..1.0);
    }
    let k = rand_tensor(&mut rng, &[kn, c, 3, 3]);
    let b = rand_tensor(&mut rng, &[kn]);
    for s in [1, 2] {
        let expected = naive_conv(&xs, c, h, w, k.values(), kn, b.values(), s);
        let mut g = Graph::new();
        let xv = g.constant(Tensor::new(vec![c, h, w], xs.clone()).unwrap());
        let kv = g.constant(k.clone());
        let bv = g.constant(b.clone());
        let y = nn::conv2d(&mut g, xv, kv, bv, s).unwrap();
        for (a, e) in g.values(y).iter().zip(&expected) {
            assert!((a - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }
}

#[test]
fn dense_matches_hand_matmul() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = rand_vals(&mut rng, 4);
    let w = rand_vals(&mut rng, 12);
    let b = rand_vals(&mut rng, 3);
    for act in [
        Activation::Identity,
        Activation::Tanh,
        Activation::Relu,
        Activation::Sigmoid,
    ] {
        let mut g = Graph::new();
        let xv = g.constant(Tensor::vector(x.clone()));
        let wv = g.constant(Tensor::new(vec![3, 4], w.clone()).unwrap());
        let bv = g.constant(Tensor::vector(b.clone()));
        let y = nn::dense(&mut g, xv, wv, bv, act).unwrap();
        for r in 0..3 {
            let mut z = b[r];
            for c in 0..4 {
                z += w[r * 4 + c] * x[c];
            }
            let e = act.eval(z);
            let a = g.values(y)[r];
            assert!(
                (a - e).abs() <= 1e-12 * e.abs().max(1e-300),
                "{act:?}: {a} vs {e}"
            );
        }
    }
}

fn reference_lstm(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    wih: &[f64],
    whh: &[f64],
    b: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let m = h.len();
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let mut h2 = vec![0.0; m];
    let mut c2 = vec![0.0; m];
    for u in 0..m {
        let mut pre = [0.0; 4];
        for (gate, p) in pre.iter_mut().enumerate() {
            let row = gate * m + u;
            let mut z = b[row];
            for k in 0..n {
                z += wih[row * n + k] * x[k];
            }
            for k in 0..m {
                z += whh[row * m + k] * h[k];
            }
            *p = z;
        }
        let i = sig(pre[0]);
        let f = sig(pre[1]);
        let gg = pre[2].tanh();
        let o = sig(pre[3]);
        c2[u] = f * c[u] + i * gg;
        h2[u] = o * c2[u].tanh();
    }
    (h2, c2)
}

#[test]
fn lstm_matches_scalar_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (n, m) = (9, 16);
    let x = rand_vals(&mut rng, n);
    let h = rand_vals(&mut rng, m);
    let c = rand_vals(&mut rng, m);
    let wih = rand_vals(&mut rng, 4 * m * n);
    let whh = rand_vals(&mut rng, 4 * m * m);
    let b = rand_vals(&mut rng, 4 * m);
    let (eh, ec) = reference_lstm(&x, &h, &c, &wih, &whh, &b);
    let mut g = Graph::new();
    let p = LstmWeights {
        w_ih: g.constant(Tensor::new(vec![4 * m, n], wih).unwrap()),
        w_hh: g.constant(Tensor::new(vec![4 * m, m], whh).unwrap()),
        bias: g.constant(Tensor::vector(b)),
    };
    let xv = g.constant(Tensor::vector(x));
    let hv = g.constant(Tensor::vector(h));
    let cv = g.constant(Tensor::vector(c));
    let (h2, c2) = nn::lstm_step(&mut g, xv, hv, cv, &p).unwrap();
    for k in 0..m {
        assert!((g.values(h2)[k] - eh[k]).abs() <= 1e-12 * eh[k].abs().max(1e-3));
        assert!((g.values(c2)[k] - ec[k]).abs() <= 1e-12 * ec[k].abs().max(1e-3));
    }
}

/// Checks d(sum(w ⊙ f(inputs)))/d(inputs) against central differences, with
/// fixed random projection weights `w` so every output element matters.
fn fd_check(inputs: Vec<Tensor>, f: impl Fn(&mut Graph, &[Var]) -> Var) {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-5;
    let eval = |vals: &[Tensor], grad: bool| -> (f64, Vec<Option<Vec<f64>>>) {
        let mut g = Graph::new();
        let vars: Vec<Var> = vals.iter().map(|t| g.leaf(t.clone())).collect();
        let out = f(&mut g, &vars);
        let n = g.value(out).len();
        let proj: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37 + 0.11).sin()).collect();
        let pv = g.constant(Tensor::new(g.shape(out).to_vec(), proj).unwrap());
        let prod = g.mul(out, pv).unwrap();
        let s = g.sum(prod);
        let loss = g.value(s).item();
        if !grad {
            return (loss, Vec::new());
        }
        let grads = g.backward(s).unwrap();
        (
            loss,
            vars.iter()
                .map(|v| grads.get(*v).map(<[f64]>::to_vec))
                .collect(),
        )
    };
    let (_, analytic) = eval(&inputs, true);
    for (ti, t) in inputs.iter().enumerate() {
        for k in 0..t.len() {
            let mut up = inputs.clone();
            up[ti].values_mut()[k] += STEP;
            let mut down = inputs.clone();
            down[ti].values_mut()[k] -= STEP;
            let numeric = (eval(&up, false).0 - eval(&down, false).0) / (2.0 * STEP);
            let a = analytic[ti].as_ref().map_or(0.0, |g| g[k]);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            assert!(
                rel < TOL,
                "input {ti}[{k}]: analytic {a} numeric {numeric} rel {rel}"
            );
        }
    }
}

#[test]
fn elementwise_ops_gradcheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = rand_tensor(&mut rng, &[2, 3]);
    let b = rand_tensor(&mut rng, &[2, 3]);
    fd_check(vec![a.clone(), b.clone()], |g, v| {
        g.add(v[0], v[1]).unwrap()
    });
    fd_check(vec![a.clone(), b.clone()], |g, v| {
        g.sub(v[0], v[1]).unwrap()
    });
    fd_check(vec![a.clone(), b.clone()], |g, v| {
        g.mul(v[0], v[1]).unwrap()
    });
    fd_check(vec![a.clone()], |g, v| g.scale(v[0], -2.5));
    fd_check(vec![a.clone()], |g, v| g.offset(v[0], 0.7));
    fd_check(vec![a.clone()], |g, v| g.tanh(v[0]));
    fd_check(vec![a.clone()], |g, v| g.sigmoid(v[0]));
    fd_check(vec![a.clone()], |g, v| g.softplus(v[0]));
    fd_check(vec![a.clone()], |g, v| g.exp(v[0]));
    fd_check(vec![a.clone()], |g, v| g.square(v[0]));
    fd_check(vec![a.clone()], |g, v| {
        let s = g.scale(v[0], 90.0);
        g.wrap_degrees(s)
    });
    // relu away from the kink
    let shifted = Tensor::new(vec![4], vec![0.5, -0.5, 1.2, -1.3]).unwrap();
    fd_check(vec![shifted], |g, v| g.relu(v[0]));
}

#[test]
fn structural_ops_gradcheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let a = rand_tensor(&mut rng, &[5]);
    let b = rand_tensor(&mut rng, &[2, 2]);
    fd_check(vec![a.clone(), b.clone()], |g, v| {
        g.concat(&[v[0], v[1], v[0]]).unwrap()
    });
    fd_check(vec![a.clone()], |g, v| g.slice(v[0], 1, 3).unwrap());
    fd_check(vec![b.clone()], |g, v| g.flatten(v[0]).unwrap());
    fd_check(vec![a.clone()], |g, v| g.sum(v[0]));
}

#[test]
fn matvec_and_dense_gradcheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let w = rand_tensor(&mut rng, &[3, 4]);
    let x = rand_tensor(&mut rng, &[4]);
    let b = rand_tensor(&mut rng, &[3]);
    fd_check(vec![w.clone(), x.clone()], |g, v| {
        g.matvec(v[0], v[1]).unwrap()
    });
    for act in [Activation::Tanh, Activation::Sigmoid, Activation::Identity] {
        fd_check(vec![w.clone(), x.clone(), b.clone()], |g, v| {
            nn::dense(g, v[1], v[0], v[2], act).unwrap()
        });
    }
}

#[test]
fn conv_gradcheck_dense_and_sparse_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let x = rand_tensor(&mut rng, &[2, 7, 7]);
    let k = rand_tensor(&mut rng, &[3, 2, 3, 3]);
    let b = rand_tensor(&mut rng, &[3]);
    for s in [1, 2] {
        fd_check(vec![x.clone(), k.clone(), b.clone()], |g, v| {
            nn::conv2d(g, v[0], v[1], v[2], s).unwrap()
        });
    }
    // Kernel gradient through the sparse-input path.
    let mut sparse = vec![0.0; 98];
    sparse[3] = 0.8;
    sparse[50] = -0.4;
    let xs = Tensor::new(vec![2, 7, 7], sparse).unwrap();
    for s in [1, 2] {
        let xs = xs.clone();
        fd_check(vec![k.clone(), b.clone()], move |g, v| {
            let xv = g.constant(xs.clone());
            nn::conv2d(g, xv, v[0], v[1], s).unwrap()
        });
    }
}

#[test]
fn lstm_gradcheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let (n, m) = (3, 4);
    let inputs = vec![
        rand_tensor(&mut rng, &[n]),
        rand_tensor(&mut rng, &[m]),
        rand_tensor(&mut rng, &[m]),
        rand_tensor(&mut rng, &[4 * m, n]),
        rand_tensor(&mut rng, &[4 * m, m]),
        rand_tensor(&mut rng, &[4 * m]),
    ];
    fd_check(inputs, |g, v| {
        let p = LstmWeights {
            w_ih: v[3],
            w_hh: v[4],
            bias: v[5],
        };
        // two steps so the recurrence is exercised
        let (h1, c1) = nn::lstm_step(g, v[0], v[1], v[2], &p).unwrap();
        let (h2, c2) = nn::lstm_step(g, v[0], h1, c1, &p).unwrap();
        g.concat(&[h2, c2]).unwrap()
    });
}

#[test]
fn composed_chain_gradcheck() {
    // conv -> tanh -> flatten -> dense -> softplus: the composed gradient
    // must equal finite differences of the whole chain.
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let x = rand_tensor(&mut rng, &[1, 6, 6]);
    let k = rand_tensor(&mut rng, &[2, 1, 3, 3]);
    let kb = rand_tensor(&mut rng, &[2]);
    let w = rand_tensor(&mut rng, &[3, 8]);
    let b = rand_tensor(&mut rng, &[3]);
    fd_check(vec![x, k, kb, w, b], |g, v| {
        let c = nn::conv2d(g, v[0], v[1], v[2], 2).unwrap();
        let c = g.tanh(c);
        let f = g.flatten(c).unwrap();
        let d = nn::dense(g, f, v[3], v[4], Activation::Identity).unwrap();
        g.softplus(d)
    });
}

#[test]
fn seeded_backward_matches_scalar_backward() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let w = rand_tensor(&mut rng, &[3, 4]);
    let x = rand_tensor(&mut rng, &[4]);
    let mut g = Graph::new();
    let wv = g.leaf(w);
    let xv = g.constant(x);
    let y = g.matvec(wv, xv).unwrap();
    let t = g.tanh(y);
    let s = g.sum(t);
    let full = g.backward(s).unwrap();
    let seeded = g.backward_from(t, &[1.0, 1.0, 1.0]).unwrap();
    assert_eq!(full.get(wv), seeded.get(wv));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_tanh_gradient_matches_fd(seed in 0u64..10_000, m in 1usize..5, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = rand_tensor(&mut rng, &[m, n]);
        let x = rand_tensor(&mut rng, &[n]);
        let b = rand_tensor(&mut rng, &[m]);
        fd_check(vec![w, x, b], |g, v| nn::dense(g, v[1], v[0], v[2], Activation::Tanh).unwrap());
    }

    #[test]
    fn forward_values_stay_finite(vals in proptest::collection::vec(-50.0f64..50.0, 6)) {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::vector(vals));
        let outs = [g.tanh(x), g.sigmoid(x), g.softplus(x), g.exp(x), g.square(x)];
        for o in outs {
            prop_assert!(g.value(o).all_finite());
        }
    }
}
