//! Statistical and convergence properties of RBM and network training.

use rbm_sparsity::data::Dataset;
use rbm_sparsity::network::{evaluate, fine_tune, init_random, FineTuneConfig, Loss};
use rbm_sparsity::rbm::{cd1_update, Cd1Step, Cd1Velocity, MomentumSchedule, RbmParams};
use rbm_sparsity::{Matrix, Rng};

/// Exact `∂/∂W` of the mean log-likelihood, by enumerating visibles.
fn exact_weight_gradient(p: &RbmParams, data: &Matrix) -> Vec<f64> {
    let (d_x, d_h) = (p.n_visible(), p.n_hidden());
    let sig = |t: f64| 1.0 / (1.0 + (-t).exp());
    let conditional = |x: &[f64]| -> Vec<f64> {
        (0..d_h)
            .map(|j| sig(p.hidden_bias[j] + (0..d_x).map(|i| p.weights.get(j, i) * x[i]).sum::<f64>()))
            .collect()
    };
    // unnormalised log p(x) = c·x + Σ_j softplus(b_j + W_j·x)
    let log_weight = |x: &[f64]| -> f64 {
        let cx: f64 = (0..d_x).map(|i| p.visible_bias[i] * x[i]).sum();
        cx + (0..d_h)
            .map(|j| {
                let t = p.hidden_bias[j] + (0..d_x).map(|i| p.weights.get(j, i) * x[i]).sum::<f64>();
                t.exp().ln_1p()
            })
            .sum::<f64>()
    };
    let states: Vec<Vec<f64>> = (0..1u32 << d_x)
        .map(|m| (0..d_x).map(|i| f64::from((m >> i) & 1)).collect())
        .collect();
    let weights: Vec<f64> = states.iter().map(|x| log_weight(x).exp()).collect();
    let z: f64 = weights.iter().sum();

    let mut grad = vec![0.0; d_h * d_x];
    for x in data.row_iter() {
        let h = conditional(x);
        for j in 0..d_h {
            for i in 0..d_x {
                grad[j * d_x + i] += h[j] * x[i] / data.rows() as f64;
            }
        }
    }
    for (x, w) in states.iter().zip(&weights) {
        let h = conditional(x);
        for j in 0..d_h {
            for i in 0..d_x {
                grad[j * d_x + i] -= w / z * h[j] * x[i];
            }
        }
    }
    grad
}

#[test]
fn cd1_direction_agrees_with_the_likelihood_gradient() {
    const RUNS: u64 = 10_000;
    let mut agree = 0;
    let mut counted = 0;
    for model in 0..3u64 {
        let mut rng = Rng::new(500 + model);
        let mut params = RbmParams::zeros(4, 3);
        params.weights.data_mut().iter_mut().for_each(|w| *w = rng.normal(0.0, 0.5));
        params.hidden_bias.iter_mut().for_each(|b| *b = rng.normal(0.0, 0.5));
        params.visible_bias.iter_mut().for_each(|c| *c = rng.normal(0.0, 0.5));
        let data = Matrix::from_rows(&[
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let exact = exact_weight_gradient(&params, &data);

        let step = Cd1Step {
            learning_rate: 1.0,
            momentum: 0.0,
            l2: 0.0,
        };
        let mut mean = vec![0.0; exact.len()];
        for run in 0..RUNS {
            let mut p = params.clone();
            let mut v = Cd1Velocity::zeros_like(&p);
            cd1_update(&mut p, &data, &step, &mut Rng::new(run), &mut v).unwrap();
            for (m, dw) in mean.iter_mut().zip(v.weights.data()) {
                *m += dw / RUNS as f64;
            }
        }
        for (e, m) in exact.iter().zip(&mean) {
            if e.abs() > 1e-3 {
                counted += 1;
                agree += usize::from(e.signum() == m.signum());
            }
        }
    }
    assert!(counted > 0);
    let rate = agree as f64 / counted as f64;
    assert!(rate >= 0.9, "sign agreement {agree}/{counted}");
}

fn separable(n: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for s in 0..n {
        let class = s % 2;
        let lead = if class == 1 {
            0.6 + 0.4 * rng.uniform()
        } else {
            0.4 * rng.uniform()
        };
        let mut row = vec![lead];
        row.extend((0..3).map(|_| rng.uniform()));
        rows.push(row);
        labels.push(class);
    }
    Dataset::new(Matrix::from_rows(&rows).unwrap(), labels, 2).unwrap()
}

#[test]
fn separable_data_is_fit_within_fifty_epochs() {
    let data = separable(100, 3);
    let net = init_random(&[4, 8], 2, 1).unwrap();
    let config = FineTuneConfig {
        learning_rate: 0.5,
        batch_size: 10,
        epochs: 50,
        seed: 2,
        ..FineTuneConfig::default()
    };
    let (_, reports) = fine_tune(net, &data, &data, &config).unwrap();
    let first_perfect = reports.iter().find(|r| r.test_error == 0.0);
    assert!(first_perfect.is_some(), "final training error {}", reports[49].test_error);
}

#[test]
fn full_batch_descent_never_increases_the_loss() {
    let data = separable(8, 9);
    for loss in [Loss::NegativeLogLikelihood, Loss::Squared] {
        let net = init_random(&[4, 5, 3], 2, 4).unwrap();
        let config = FineTuneConfig {
            learning_rate: 1e-2,
            momentum: MomentumSchedule::constant(0.0),
            l2: 0.0,
            batch_size: 8,
            epochs: 60,
            seed: 0,
            loss,
        };
        let (_, reports) = fine_tune(net, &data, &data, &config).unwrap();
        for w in reports.windows(2) {
            assert!(
                w[1].train_loss <= w[0].train_loss,
                "{loss:?}: loss rose from {} to {} at epoch {}",
                w[0].train_loss,
                w[1].train_loss,
                w[1].epoch
            );
        }
    }
}

#[test]
fn random_head_is_at_chance_on_balanced_classes() {
    const N: usize = 10_000;
    let mut rng = Rng::new(8);
    let mut x = Matrix::zeros(N, 12);
    x.data_mut().iter_mut().for_each(|v| *v = rng.uniform());
    let labels: Vec<usize> = (0..N).map(|i| i % 10).collect();
    for seed in 0..3 {
        let net = init_random(&[12, 16], 10, seed).unwrap();
        let error = evaluate(&net, &x, &labels).unwrap();
        assert!((error - 0.9).abs() <= 0.02, "seed {seed}: error {error}");
    }
}
