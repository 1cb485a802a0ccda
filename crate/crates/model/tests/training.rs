mod common;

use common::*;
use maip_autodiff::Tensor;
use maip_model::*;

fn quick(epochs: usize, batch: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch,
        seed,
        ..TrainConfig::default()
    }
}

fn dataset(n: usize) -> Vec<PreparedSample> {
    (0..n as u64)
        .map(|i| synthetic_sample(12, 5, 5, 100 + i))
        .collect()
}

#[test]
fn memorises_a_single_sample() {
    let mut m = Model::init(small_config(), 1).unwrap();
    let x1 = static_input(12, 1);
    let data = vec![synthetic_sample(12, 5, 5, 7)];
    let cfg = TrainConfig {
        epochs: 1500,
        batch: 1,
        lr: 3e-3,
        beta: 0.01,
        ..quick(0, 1, 5)
    };
    let rep = train(&mut m, &x1, &data, &cfg).unwrap();
    let rec = sample_loss(&m, &x1, &data[0], &[0.0, 0.0], 0.0, LossWeights::UNIT)
        .unwrap()
        .reconstruction;
    assert!(
        rec < 1e-2,
        "reconstruction {rec}, last epoch loss {:?}",
        rep.loss.last()
    );
}

#[test]
fn history_has_one_entry_per_epoch_and_runs_repeat() {
    let x1 = static_input(12, 2);
    let data = dataset(10);
    let mut a = Model::init(small_config(), 3).unwrap();
    let mut b = a.clone();
    let ra = train(&mut a, &x1, &data, &quick(3, 4, 9)).unwrap();
    let rb = train(&mut b, &x1, &data, &quick(3, 4, 9)).unwrap();
    assert_eq!(ra.loss.len(), 3);
    assert_eq!(ra.kl.len(), 3);
    assert_eq!(ra.steps, 9);
    assert!(a.params.bitwise_eq(&b.params));
    assert_eq!(ra, rb);

    let mut c = Model::init(small_config(), 3).unwrap();
    train(&mut c, &x1, &data, &quick(3, 4, 10)).unwrap();
    assert!(!a.params.bitwise_eq(&c.params));
}

#[test]
fn batch_gradient_is_the_sum_of_sample_gradients() {
    let m = Model::init(small_config(), 4).unwrap();
    let x1 = static_input(12, 3);
    let data = dataset(3);
    let eps: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![-1.0, 0.5], vec![0.0, 2.0]];
    let refs: Vec<&PreparedSample> = data.iter().collect();
    let (parts, whole) =
        batch_gradients(&m, &x1, &refs, &eps, 0.5, LossWeights::default()).unwrap();
    let mut total = 0.0;
    let mut sum = None::<maip_autodiff::ParamGrads>;
    for (s, e) in data.iter().zip(&eps) {
        let (p, g) = batch_gradients(
            &m,
            &x1,
            &[s],
            std::slice::from_ref(e),
            0.5,
            LossWeights::default(),
        )
        .unwrap();
        total += p.total;
        match sum.as_mut() {
            Some(acc) => acc.add_assign(&g),
            None => sum = Some(g),
        }
    }
    let sum = sum.unwrap();
    assert!((parts.total - total).abs() < 1e-9);
    for i in 0..m.params.len() {
        for (a, b) in whole.get(i).unwrap().iter().zip(sum.get(i).unwrap()) {
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                "{}: {a} vs {b}",
                m.params.name(i)
            );
        }
    }
}

#[test]
fn rejects_bad_input() {
    let x1 = static_input(12, 2);
    let mut m = Model::init(small_config(), 3).unwrap();
    assert!(matches!(
        train(&mut m, &x1, &[], &quick(1, 4, 0)),
        Err(ModelError::EmptyDataset)
    ));
    let short = vec![synthetic_sample(12, 5, 3, 1)];
    assert!(matches!(
        train(&mut m, &x1, &short, &quick(1, 4, 0)),
        Err(ModelError::Config(_))
    ));
}

#[test]
fn non_finite_loss_aborts() {
    let x1 = static_input(12, 2);
    let mut m = Model::init(small_config(), 3).unwrap();
    let b = m.params.get_mut("dec_out.b").unwrap();
    let mut v = b.values().to_vec();
    v[0] = f64::NAN;
    *b = Tensor::new(vec![v.len()], v).unwrap();
    let err = train(&mut m, &x1, &dataset(4), &quick(2, 2, 0)).unwrap_err();
    assert!(matches!(err, ModelError::Diverged { step: 0, .. }), "{err}");
}

#[test]
fn deterministic_variant_trains_without_kl() {
    let x1 = static_input(12, 2);
    let mut m = Model::init(
        ModelConfig {
            latent: false,
            ..small_config()
        },
        3,
    )
    .unwrap();
    let rep = train(&mut m, &x1, &dataset(8), &quick(4, 4, 1)).unwrap();
    assert!(rep.kl.iter().all(|&k| k == 0.0));
    assert!(rep.loss.last() < rep.loss.first());
}
