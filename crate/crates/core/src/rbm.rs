//! Binary restricted Boltzmann machines trained with one-step contrastive
//! divergence, and greedy layer-wise stacking.
//!
//! Weights are stored hidden-major (`d_h × d_x`), so `W[j][i]` couples hidden
//! unit `j` to visible unit `i`.

use crate::data::BatchPlan;
use crate::error::{Error, Result};
use crate::matrix::{self, matmul, matmul_at, matmul_bt, Matrix};
use crate::rng::{bernoulli_sample, gaussian_matrix, Rng};

/// Standard deviation of the initial weights.
pub const INIT_STDDEV: f64 = 0.01;

/// Largest `d_x + d_h` accepted by [`exact_log_likelihood`].
pub const MAX_ENUMERATION_UNITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    /// `d_h × d_x`.
    pub weights: Matrix,
    /// `b`, one per hidden unit.
    pub hidden_bias: Vec<f64>,
    /// `c`, one per visible unit.
    pub visible_bias: Vec<f64>,
}

impl RbmParams {
    pub fn new(weights: Matrix, hidden_bias: Vec<f64>, visible_bias: Vec<f64>) -> Result<Self> {
        let (d_h, d_x) = weights.shape();
        if d_h == 0 || d_x == 0 {
            return Err(Error::Domain("an RBM needs at least one unit per layer".into()));
        }
        if hidden_bias.len() != d_h || visible_bias.len() != d_x {
            return Err(Error::Shape {
                op: "RbmParams::new",
                left: (d_h, d_x),
                right: (hidden_bias.len(), visible_bias.len()),
            });
        }
        let params = RbmParams {
            weights,
            hidden_bias,
            visible_bias,
        };
        if !params.is_finite() {
            return Err(Error::Numeric("RBM parameters contain NaN or Inf".into()));
        }
        Ok(params)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        RbmParams {
            weights: Matrix::zeros(n_hidden, n_visible),
            hidden_bias: vec![0.0; n_hidden],
            visible_bias: vec![0.0; n_visible],
        }
    }

    /// Weights from N(0, 0.01²), zero biases.
    pub fn init(n_visible: usize, n_hidden: usize, rng: &mut Rng) -> Self {
        RbmParams {
            weights: gaussian_matrix(rng, n_hidden, n_visible, 0.0, INIT_STDDEV),
            hidden_bias: vec![0.0; n_hidden],
            visible_bias: vec![0.0; n_visible],
        }
    }

    pub fn n_visible(&self) -> usize {
        self.weights.cols()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite()
            && self.hidden_bias.iter().all(|v| v.is_finite())
            && self.visible_bias.iter().all(|v| v.is_finite())
    }
}

/// `η(x, h) = −hᵀWx − cᵀx − bᵀh`.
pub fn energy(params: &RbmParams, x: &[f64], h: &[f64]) -> Result<f64> {
    if x.len() != params.n_visible() || h.len() != params.n_hidden() {
        return Err(Error::Shape {
            op: "energy",
            left: (params.n_hidden(), params.n_visible()),
            right: (h.len(), x.len()),
        });
    }
    let mut interaction = 0.0;
    for (j, &hj) in h.iter().enumerate() {
        let w = params.weights.row(j);
        let wx: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        interaction += hj * wx;
    }
    let cx: f64 = params.visible_bias.iter().zip(x).map(|(a, b)| a * b).sum();
    let bh: f64 = params.hidden_bias.iter().zip(h).map(|(a, b)| a * b).sum();
    Ok(-interaction - cx - bh)
}

/// `p(h_j = 1 | x)` for every row of `x`.
pub fn prop_up(params: &RbmParams, x: &Matrix) -> Result<Matrix> {
    if x.cols() != params.n_visible() {
        return Err(Error::Shape {
            op: "prop_up",
            left: x.shape(),
            right: params.weights.shape(),
        });
    }
    let mut pre = matmul_bt(x, &params.weights)?;
    pre.add_row_broadcast(&params.hidden_bias)?;
    Ok(matrix::sigmoid(&pre))
}

/// `p(x_i = 1 | h)` for every row of `h`.
pub fn prop_down(params: &RbmParams, h: &Matrix) -> Result<Matrix> {
    if h.cols() != params.n_hidden() {
        return Err(Error::Shape {
            op: "prop_down",
            left: h.shape(),
            right: params.weights.shape(),
        });
    }
    let mut pre = matmul(h, &params.weights)?;
    pre.add_row_broadcast(&params.visible_bias)?;
    Ok(matrix::sigmoid(&pre))
}

/// Momentum that ramps linearly from `initial` to `final_value` over the first
/// half of training and then stays at `final_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSchedule {
    pub initial: f64,
    pub final_value: f64,
}

impl Default for MomentumSchedule {
    fn default() -> Self {
        MomentumSchedule {
            initial: 0.5,
            final_value: 0.9,
        }
    }
}

impl MomentumSchedule {
    pub fn constant(value: f64) -> Self {
        MomentumSchedule {
            initial: value,
            final_value: value,
        }
    }

    /// Momentum for zero-based `epoch` out of `total` epochs.
    pub fn at(&self, epoch: usize, total: usize) -> f64 {
        let half = total as f64 / 2.0;
        let e = epoch as f64;
        if e >= half {
            self.final_value
        } else {
            self.initial + (self.final_value - self.initial) * (e / half)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmTrainConfig {
    pub learning_rate: f64,
    pub momentum: MomentumSchedule,
    /// Weight decay on `W` only.
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for RbmTrainConfig {
    fn default() -> Self {
        RbmTrainConfig {
            learning_rate: 0.1,
            momentum: MomentumSchedule::default(),
            l2: 1e-4,
            batch_size: 100,
            epochs: 10,
            seed: 0,
        }
    }
}

/// Learning rates tried in the reference training recipe.
pub const LEARNING_RATE_GRID: [f64; 4] = [1.0, 0.1, 0.05, 0.01];

/// Hyperparameters for a single CD-1 step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cd1Step {
    pub learning_rate: f64,
    pub momentum: f64,
    pub l2: f64,
}

/// Previous parameter increments, reused by the momentum term.
#[derive(Debug, Clone, PartialEq)]
pub struct Cd1Velocity {
    pub weights: Matrix,
    pub hidden_bias: Vec<f64>,
    pub visible_bias: Vec<f64>,
}

impl Cd1Velocity {
    pub fn zeros_like(params: &RbmParams) -> Self {
        Cd1Velocity {
            weights: Matrix::zeros(params.n_hidden(), params.n_visible()),
            hidden_bias: vec![0.0; params.n_hidden()],
            visible_bias: vec![0.0; params.n_visible()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    /// Mean over the batch of `‖x − v1‖²`.
    pub reconstruction_error: f64,
    /// Frobenius norm of the weight increment.
    pub update_norm: f64,
}

/// Per-epoch training telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cd1Stats {
    /// One-based.
    pub epoch: usize,
    /// Sample-weighted mean of the batch reconstruction errors.
    pub reconstruction_error: f64,
    /// Frobenius norm of the last weight increment of the epoch.
    pub update_norm: f64,
}

/// One CD-1 step on `x`, updating `params` and `velocity` in place.
///
/// Positive statistics use `p(h|x)`; a single binary hidden sample drives a
/// mean-field reconstruction `v1`, whose hidden probabilities give the
/// negative statistics.
pub fn cd1_update(
    params: &mut RbmParams,
    x: &Matrix,
    step: &Cd1Step,
    rng: &mut Rng,
    velocity: &mut Cd1Velocity,
) -> Result<StepStats> {
    if x.rows() == 0 {
        return Err(Error::Domain("CD-1 on an empty batch".into()));
    }
    if let Some(v) = x.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("CD-1 input {v} outside [0, 1]")));
    }
    let h0p = prop_up(params, x)?;
    let h0 = bernoulli_sample(rng, &h0p)?;
    let v1 = prop_down(params, &h0)?;
    let h1p = prop_up(params, &v1)?;

    let n = x.rows() as f64;
    let Cd1Step {
        learning_rate: lr,
        momentum,
        l2,
    } = *step;

    let positive = matmul_at(&h0p, x)?;
    let negative = matmul_at(&h1p, &v1)?;
    let w = params.weights.data_mut();
    let dw = velocity.weights.data_mut();
    for k in 0..w.len() {
        let grad = (positive.data()[k] - negative.data()[k]) / n;
        dw[k] = lr * (grad - l2 * w[k]) + momentum * dw[k];
        w[k] += dw[k];
    }

    for j in 0..params.n_hidden() {
        let mut diff = 0.0;
        for s in 0..x.rows() {
            diff += h0p.get(s, j) - h1p.get(s, j);
        }
        let db = &mut velocity.hidden_bias[j];
        *db = lr * (diff / n) + momentum * *db;
        params.hidden_bias[j] += *db;
    }
    for i in 0..params.n_visible() {
        let mut diff = 0.0;
        for s in 0..x.rows() {
            diff += x.get(s, i) - v1.get(s, i);
        }
        let dc = &mut velocity.visible_bias[i];
        *dc = lr * (diff / n) + momentum * *dc;
        params.visible_bias[i] += *dc;
    }

    let mut sq = 0.0;
    for (a, b) in x.data().iter().zip(v1.data()) {
        sq += (a - b) * (a - b);
    }
    let stats = StepStats {
        reconstruction_error: sq / n,
        update_norm: velocity.weights.frobenius_norm(),
    };
    if !params.is_finite() || !stats.update_norm.is_finite() {
        return Err(Error::Numeric("CD-1 produced a non-finite parameter".into()));
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedRbm {
    pub params: RbmParams,
    pub stats: Vec<Cd1Stats>,
}

/// Trains an RBM with `n_hidden` units on `data` (rows are samples in `[0,1]`).
pub fn train_rbm(data: &Matrix, n_hidden: usize, config: &RbmTrainConfig) -> Result<TrainedRbm> {
    train_rbm_observed(data, n_hidden, config, |_, _| {})
}

/// As [`train_rbm`], calling `observe` after every epoch.
pub fn train_rbm_observed(
    data: &Matrix,
    n_hidden: usize,
    config: &RbmTrainConfig,
    mut observe: impl FnMut(&Cd1Stats, &RbmParams),
) -> Result<TrainedRbm> {
    if n_hidden == 0 || data.cols() == 0 {
        return Err(Error::Domain("an RBM needs at least one unit per layer".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Domain("batch size must be at least 1".into()));
    }
    if data.rows() < config.batch_size {
        return Err(Error::Domain(format!(
            "{} training rows is fewer than the batch size {}",
            data.rows(),
            config.batch_size
        )));
    }
    let mut rng = Rng::new(config.seed);
    let mut params = RbmParams::init(data.cols(), n_hidden, &mut rng);
    let mut velocity = Cd1Velocity::zeros_like(&params);
    let mut stats = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let step = Cd1Step {
            learning_rate: config.learning_rate,
            momentum: config.momentum.at(epoch, config.epochs),
            l2: config.l2,
        };
        let plan = BatchPlan::new(data.rows(), config.batch_size, config.seed, epoch as u64);
        let mut err_sum = 0.0;
        let mut last_norm = 0.0;
        for (b, indices) in plan.batches().enumerate() {
            let batch = data.select_rows(indices);
            let s = cd1_update(&mut params, &batch, &step, &mut rng, &mut velocity).map_err(
                |e| match e {
                    Error::Numeric(msg) => {
                        Error::Numeric(format!("{msg} (epoch {}, batch {b})", epoch + 1))
                    }
                    other => other,
                },
            )?;
            err_sum += s.reconstruction_error * indices.len() as f64;
            last_norm = s.update_norm;
        }
        let epoch_stats = Cd1Stats {
            epoch: epoch + 1,
            reconstruction_error: err_sum / data.rows() as f64,
            update_norm: last_norm,
        };
        log::debug!(
            "rbm {}x{} epoch {}: recon {:.5}",
            data.cols(),
            n_hidden,
            epoch + 1,
            epoch_stats.reconstruction_error
        );
        observe(&epoch_stats, &params);
        stats.push(epoch_stats);
    }
    Ok(TrainedRbm { params, stats })
}

/// Greedy layer-wise pretraining: each RBM is trained on the mean-field
/// hidden probabilities of the one below. Layer `l` uses seed
/// `config.seed + l`.
pub fn pretrain_stack(
    data: &Matrix,
    layer_sizes: &[usize],
    config: &RbmTrainConfig,
) -> Result<Vec<TrainedRbm>> {
    pretrain_stack_observed(data, layer_sizes, config, |_, _, _, _| {})
}

/// As [`pretrain_stack`]; `observe(layer, stats, params, layer_input)` runs
/// after every epoch of every layer.
pub fn pretrain_stack_observed(
    data: &Matrix,
    layer_sizes: &[usize],
    config: &RbmTrainConfig,
    mut observe: impl FnMut(usize, &Cd1Stats, &RbmParams, &Matrix),
) -> Result<Vec<TrainedRbm>> {
    if layer_sizes.is_empty() {
        return Err(Error::Domain("pretraining needs at least one layer".into()));
    }
    let mut stack = Vec::with_capacity(layer_sizes.len());
    let mut input = data.clone();
    for (layer, &size) in layer_sizes.iter().enumerate() {
        let layer_config = RbmTrainConfig {
            seed: config.seed.wrapping_add(layer as u64),
            ..config.clone()
        };
        let trained = train_rbm_observed(&input, size, &layer_config, |s, p| {
            observe(layer, s, p, &input)
        })?;
        if layer + 1 < layer_sizes.len() {
            input = prop_up(&trained.params, &input)?;
        }
        stack.push(trained);
    }
    Ok(stack)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn binary_state(bits: usize, len: usize) -> Vec<f64> {
    (0..len).map(|i| ((bits >> i) & 1) as f64).collect()
}

/// Checks the enumeration size guard.
fn check_enumerable(params: &RbmParams) -> Result<()> {
    let units = params.n_visible() + params.n_hidden();
    if units > MAX_ENUMERATION_UNITS {
        return Err(Error::Domain(format!(
            "exact likelihood needs d_x + d_h <= {MAX_ENUMERATION_UNITS}, got {units}"
        )));
    }
    Ok(())
}

/// `log Σ_h exp(−η(x, h))` by enumerating every hidden state.
fn log_unnormalised(params: &RbmParams, x: &[f64]) -> Result<f64> {
    let d_h = params.n_hidden();
    let terms = (0..1usize << d_h)
        .map(|bits| energy(params, x, &binary_state(bits, d_h)).map(|e| -e))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&terms))
}

/// `log Z`, summing `exp(−η)` over every joint binary state.
pub fn log_partition(params: &RbmParams) -> Result<f64> {
    check_enumerable(params)?;
    let d_x = params.n_visible();
    let per_visible = (0..1usize << d_x)
        .map(|bits| log_unnormalised(params, &binary_state(bits, d_x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&per_visible))
}

/// Exact `log p(x)` for a binary visible vector.
pub fn log_probability(params: &RbmParams, x: &[f64]) -> Result<f64> {
    check_enumerable(params)?;
    Ok(log_unnormalised(params, x)? - log_partition(params)?)
}

/// Mean exact `log p(x)` over the rows of `data`, by brute-force enumeration.
/// Only feasible for tiny models.
pub fn exact_log_likelihood(params: &RbmParams, data: &Matrix) -> Result<f64> {
    check_enumerable(params)?;
    if data.rows() == 0 {
        return Err(Error::Domain("log-likelihood of an empty dataset".into()));
    }
    if data.cols() != params.n_visible() {
        return Err(Error::Shape {
            op: "exact_log_likelihood",
            left: data.shape(),
            right: params.weights.shape(),
        });
    }
    let log_z = log_partition(params)?;
    let mut total = 0.0;
    for row in data.row_iter() {
        total += log_unnormalised(params, row)? - log_z;
    }
    Ok(total / data.rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_hand_cases() {
        let p = RbmParams::new(
            Matrix::from_rows(&[[1.0, 2.0]]).unwrap(),
            vec![1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(energy(&p, &[1.0, 1.0], &[1.0]).unwrap(), -6.0);
        assert_eq!(energy(&p, &[0.0, 0.0], &[0.0]).unwrap(), 0.0);
        let z = RbmParams::zeros(2, 1);
        assert_eq!(energy(&z, &[1.0, 0.0], &[1.0]).unwrap(), 0.0);
        assert!(energy(&z, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn params_validate_shapes_and_units() {
        assert!(RbmParams::new(Matrix::zeros(2, 3), vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(RbmParams::new(Matrix::zeros(0, 3), vec![], vec![0.0; 3]).is_err());
        let mut w = Matrix::zeros(1, 1);
        w.set(0, 0, f64::NAN);
        assert!(matches!(
            RbmParams::new(w, vec![0.0], vec![0.0]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn conditionals_at_zero_params() {
        let p = RbmParams::zeros(4, 3);
        let up = prop_up(&p, &Matrix::filled(2, 4, 1.0)).unwrap();
        assert!(up.data().iter().all(|&v| v == 0.5));
        let down = prop_down(&p, &Matrix::filled(2, 3, 1.0)).unwrap();
        assert!(down.data().iter().all(|&v| v == 0.5));
        assert!(prop_up(&p, &Matrix::zeros(1, 3)).is_err());
        assert!(prop_down(&p, &Matrix::zeros(1, 4)).is_err());
    }

    #[test]
    fn saturated_hidden_bias() {
        let mut p = RbmParams::zeros(3, 2);
        p.hidden_bias = vec![50.0, 50.0];
        let up = prop_up(&p, &Matrix::filled(1, 3, 0.3)).unwrap();
        // 1 - 1e-20 is not representable; saturation reaches exactly 1.0
        assert!(up.data().iter().all(|&v| v >= 1.0 - 1e-20));
    }

    #[test]
    fn prop_down_with_zero_hidden_is_sigmoid_of_visible_bias() {
        let mut rng = Rng::new(1);
        let mut p = RbmParams::init(3, 2, &mut rng);
        p.visible_bias = vec![-1.0, 0.0, 2.0];
        let down = prop_down(&p, &Matrix::zeros(1, 2)).unwrap();
        for i in 0..3 {
            assert_eq!(down.get(0, i), matrix::sigmoid_scalar(p.visible_bias[i]));
        }
    }

    #[test]
    fn conditionals_match_scalar_loops() {
        let mut rng = Rng::new(21);
        let mut p = RbmParams::init(5, 3, &mut rng);
        p.weights = p.weights.map(|w| w * 100.0);
        p.hidden_bias = vec![0.3, -0.2, 0.1];
        p.visible_bias = vec![0.05, -0.4, 0.0, 0.2, 0.7];
        let x = Matrix::new(2, 5, (0..10).map(|_| rng.uniform()).collect()).unwrap();
        let up = prop_up(&p, &x).unwrap();
        for s in 0..2 {
            for j in 0..3 {
                let mut t = p.hidden_bias[j];
                for i in 0..5 {
                    t += p.weights.get(j, i) * x.get(s, i);
                }
                assert!((up.get(s, j) - 1.0 / (1.0 + (-t).exp())).abs() < 1e-14);
            }
        }
        let down = prop_down(&p, &up).unwrap();
        for s in 0..2 {
            for i in 0..5 {
                let mut t = p.visible_bias[i];
                for j in 0..3 {
                    t += p.weights.get(j, i) * up.get(s, j);
                }
                assert!((down.get(s, i) - 1.0 / (1.0 + (-t).exp())).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn momentum_ramp() {
        let m = MomentumSchedule::default();
        assert_eq!(m.at(0, 10), 0.5);
        assert!((m.at(2, 10) - 0.66).abs() < 1e-12);
        assert_eq!(m.at(5, 10), 0.9);
        assert_eq!(m.at(9, 10), 0.9);
        assert_eq!(m.at(0, 1), 0.5);
        assert_eq!(MomentumSchedule::constant(0.0).at(3, 10), 0.0);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let mut rng = Rng::new(2);
        let mut p = RbmParams::init(6, 3, &mut rng);
        let before = p.clone();
        let mut vel = Cd1Velocity::zeros_like(&p);
        let x = Matrix::filled(4, 6, 1.0);
        let step = Cd1Step {
            learning_rate: 0.0,
            momentum: 0.5,
            l2: 1e-4,
        };
        let stats = cd1_update(&mut p, &x, &step, &mut rng, &mut vel).unwrap();
        assert_eq!(p, before);
        assert_eq!(stats.update_norm, 0.0);
        assert!(stats.reconstruction_error >= 0.0);
    }

    #[test]
    fn cd1_rejects_bad_batches() {
        let mut rng = Rng::new(2);
        let mut p = RbmParams::init(2, 2, &mut rng);
        let mut vel = Cd1Velocity::zeros_like(&p);
        let step = Cd1Step {
            learning_rate: 0.1,
            momentum: 0.0,
            l2: 0.0,
        };
        assert!(cd1_update(&mut p, &Matrix::zeros(0, 2), &step, &mut rng, &mut vel).is_err());
        assert!(cd1_update(&mut p, &Matrix::filled(1, 2, 2.0), &step, &mut rng, &mut vel).is_err());
        assert!(cd1_update(&mut p, &Matrix::filled(1, 3, 1.0), &step, &mut rng, &mut vel).is_err());
    }

    #[test]
    fn uniform_model_likelihood() {
        let p = RbmParams::zeros(2, 1);
        let data = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let ll = exact_log_likelihood(&p, &data).unwrap();
        assert!((ll + 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn probabilities_normalise() {
        let mut rng = Rng::new(8);
        let mut p = RbmParams::init(4, 3, &mut rng);
        p.weights = p.weights.map(|w| w * 150.0);
        p.hidden_bias = vec![0.5, -1.0, 0.2];
        p.visible_bias = vec![-0.3, 0.1, 0.9, -1.2];
        let total: f64 = (0..16)
            .map(|bits| log_probability(&p, &binary_state(bits, 4)).unwrap().exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumeration_guard() {
        let p = RbmParams::zeros(20, 5);
        assert!(matches!(
            exact_log_likelihood(&p, &Matrix::zeros(1, 20)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let data = Matrix::filled(10, 4, 1.0);
        let config = RbmTrainConfig {
            epochs: 0,
            batch_size: 5,
            seed: 3,
            ..Default::default()
        };
        let trained = train_rbm(&data, 2, &config).unwrap();
        assert!(trained.stats.is_empty());
        assert_eq!(
            trained.params,
            RbmParams::init(4, 2, &mut Rng::new(3))
        );
        assert!(trained.params.hidden_bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn training_requires_a_full_batch() {
        let config = RbmTrainConfig {
            batch_size: 100,
            ..Default::default()
        };
        assert!(train_rbm(&Matrix::filled(10, 4, 1.0), 2, &config).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = Rng::new(5);
        let data = bernoulli_sample(&mut rng, &Matrix::filled(40, 6, 0.4)).unwrap();
        let config = RbmTrainConfig {
            batch_size: 10,
            epochs: 5,
            seed: 17,
            ..Default::default()
        };
        let a = train_rbm(&data, 3, &config).unwrap();
        let b = train_rbm(&data, 3, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stats.len(), 5);
        assert_eq!(a.stats[4].epoch, 5);
    }

    #[test]
    fn single_layer_stack_equals_train_rbm() {
        let mut rng = Rng::new(6);
        let data = bernoulli_sample(&mut rng, &Matrix::filled(20, 5, 0.5)).unwrap();
        let config = RbmTrainConfig {
            batch_size: 10,
            epochs: 3,
            seed: 4,
            ..Default::default()
        };
        let stack = pretrain_stack(&data, &[3], &config).unwrap();
        assert_eq!(stack.len(), 1);
        assert_eq!(stack[0], train_rbm(&data, 3, &config).unwrap());
        assert!(pretrain_stack(&data, &[], &config).is_err());
    }

    #[test]
    fn second_layer_trains_on_first_layer_probabilities() {
        let mut rng = Rng::new(7);
        let data = bernoulli_sample(&mut rng, &Matrix::filled(20, 5, 0.5)).unwrap();
        let config = RbmTrainConfig {
            batch_size: 10,
            epochs: 2,
            seed: 9,
            ..Default::default()
        };
        let mut seen = Vec::new();
        let stack = pretrain_stack_observed(&data, &[4, 2], &config, |layer, _, _, input| {
            if layer == 1 {
                seen.push(input.clone());
            }
        })
        .unwrap();
        let expected = prop_up(&stack[0].params, &data).unwrap();
        assert!(seen.iter().all(|m| *m == expected));
        let layer2_config = RbmTrainConfig {
            seed: 10,
            ..config
        };
        assert_eq!(stack[1], train_rbm(&expected, 2, &layer2_config).unwrap());
    }
}
