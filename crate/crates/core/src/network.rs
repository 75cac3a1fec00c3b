//! Sigmoid feedforward classifiers with a softmax head, trained by minibatch
//! SGD with momentum and weight decay.
//!
//! Three variants are built from the same pieces: a randomly initialised
//! network trained with backprop, a network whose hidden layers are copied
//! from a pretrained RBM stack and left untouched, and the same pretrained
//! network after supervised fine-tuning.

use crate::data::{BatchPlan, Dataset};
use crate::error::{Error, Result};
use crate::matrix::{self, matmul, matmul_at, matmul_bt, Matrix};
use crate::rbm::{MomentumSchedule, RbmParams, INIT_STDDEV};
use crate::rng::{gaussian_matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Random,
    Pretrained,
}

/// Fully connected layer; `weights` is `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn random(inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        Layer {
            weights: gaussian_matrix(rng, outputs, inputs, 0.0, INIT_STDDEV),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    fn pre_activation(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = matmul_bt(x, &self.weights)?;
        z.add_row_broadcast(&self.bias)?;
        Ok(z)
    }

    fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub hidden: Vec<Layer>,
    /// Visible-side bias per hidden layer, used as the decoder offset when
    /// calibrating activation thresholds. Zeros for random initialisation.
    pub decoder_bias: Vec<Vec<f64>>,
    pub head: Layer,
    pub provenance: Provenance,
}

impl Network {
    pub fn new(
        hidden: Vec<Layer>,
        decoder_bias: Vec<Vec<f64>>,
        head: Layer,
        provenance: Provenance,
    ) -> Result<Self> {
        if decoder_bias.len() != hidden.len() {
            return Err(Error::Domain(format!(
                "{} decoder biases for {} hidden layers",
                decoder_bias.len(),
                hidden.len()
            )));
        }
        let mut prev: Option<usize> = None;
        for (i, layer) in hidden.iter().chain(std::iter::once(&head)).enumerate() {
            if layer.bias.len() != layer.outputs() {
                return Err(Error::Shape {
                    op: "Network::new (bias)",
                    left: layer.weights.shape(),
                    right: (layer.bias.len(), 1),
                });
            }
            if let Some(p) = prev {
                if p != layer.inputs() {
                    return Err(Error::Domain(format!(
                        "layer {i} expects {} inputs but the previous layer has {p} outputs",
                        layer.inputs()
                    )));
                }
            }
            if let Some(c) = decoder_bias.get(i) {
                if c.len() != layer.inputs() {
                    return Err(Error::Domain(format!(
                        "decoder bias {i} has {} entries, layer has {} inputs",
                        c.len(),
                        layer.inputs()
                    )));
                }
            }
            prev = Some(layer.outputs());
        }
        let net = Network {
            hidden,
            decoder_bias,
            head,
            provenance,
        };
        if !net.is_finite() {
            return Err(Error::Numeric("network parameters contain NaN or Inf".into()));
        }
        Ok(net)
    }

    pub fn input_size(&self) -> usize {
        self.hidden.first().unwrap_or(&self.head).inputs()
    }

    pub fn n_classes(&self) -> usize {
        self.head.outputs()
    }

    /// `[input, hidden..., classes]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_size()];
        sizes.extend(self.hidden.iter().map(Layer::outputs));
        sizes.push(self.n_classes());
        sizes
    }

    pub fn is_finite(&self) -> bool {
        self.hidden.iter().all(Layer::is_finite)
            && self.head.is_finite()
            && self.decoder_bias.iter().flatten().all(|c| c.is_finite())
    }
}

/// Random network. `layer_sizes` is `[input, hidden...]`; weights are drawn
/// from N(0, 0.01²) layer by layer, head last, and biases start at zero.
pub fn init_random(layer_sizes: &[usize], n_classes: usize, seed: u64) -> Result<Network> {
    if layer_sizes.is_empty() || layer_sizes.contains(&0) || n_classes == 0 {
        return Err(Error::Domain(format!(
            "invalid network sizes {layer_sizes:?} with {n_classes} classes"
        )));
    }
    let mut rng = Rng::new(seed);
    let hidden: Vec<Layer> = layer_sizes
        .windows(2)
        .map(|w| Layer::random(w[0], w[1], &mut rng))
        .collect();
    let decoder_bias = layer_sizes[..layer_sizes.len() - 1]
        .iter()
        .map(|&n| vec![0.0; n])
        .collect();
    let head = Layer::random(*layer_sizes.last().expect("nonempty"), n_classes, &mut rng);
    Network::new(hidden, decoder_bias, head, Provenance::Random)
}

/// Hidden layers copied from an RBM stack; the softmax head is drawn as in
/// [`init_random`] from `seed`.
pub fn init_from_stack(stack: &[RbmParams], n_classes: usize, seed: u64) -> Result<Network> {
    let top = stack
        .last()
        .ok_or_else(|| Error::Domain("cannot build a network from an empty stack".into()))?;
    if n_classes == 0 {
        return Err(Error::Domain("a classifier needs at least one class".into()));
    }
    let hidden = stack
        .iter()
        .map(|p| Layer {
            weights: p.weights.clone(),
            bias: p.hidden_bias.clone(),
        })
        .collect();
    let decoder_bias = stack.iter().map(|p| p.visible_bias.clone()).collect();
    let mut rng = Rng::new(seed);
    let head = Layer::random(top.n_hidden(), n_classes, &mut rng);
    Network::new(hidden, decoder_bias, head, Provenance::Pretrained)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Sigmoid activations of each hidden layer.
    pub hidden: Vec<Matrix>,
    /// Softmax class probabilities.
    pub probs: Matrix,
}

fn softmax_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    let cols = z.cols();
    for row in out.data_mut().chunks_mut(cols.max(1)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

pub fn forward(net: &Network, x: &Matrix) -> Result<Forward> {
    if x.cols() != net.input_size() {
        return Err(Error::Shape {
            op: "forward",
            left: x.shape(),
            right: (net.input_size(), 0),
        });
    }
    let mut hidden = Vec::with_capacity(net.hidden.len());
    for layer in &net.hidden {
        let input = hidden.last().unwrap_or(x);
        let a = matrix::sigmoid(&layer.pre_activation(input)?);
        hidden.push(a);
    }
    let probs = softmax_rows(&net.head.pre_activation(hidden.last().unwrap_or(x))?);
    Ok(Forward { hidden, probs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    #[default]
    NegativeLogLikelihood,
    /// `½‖p − onehot(y)‖²` on the softmax output.
    Squared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradient of the mean batch loss, shaped like [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden: Vec<LayerGrad>,
    pub head: LayerGrad,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        let mut sq = 0.0;
        for g in self.hidden.iter().chain(std::iter::once(&self.head)) {
            sq += g.weights.data().iter().map(|v| v * v).sum::<f64>();
            sq += g.bias.iter().map(|v| v * v).sum::<f64>();
        }
        sq.sqrt()
    }
}

fn check_labels(labels: &[usize], rows: usize, classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Domain(format!(
            "{} labels for {rows} samples",
            labels.len()
        )));
    }
    if let Some(l) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Domain(format!(
            "label {l} outside [0, {classes})"
        )));
    }
    Ok(())
}

fn loss_from_probs(probs: &Matrix, labels: &[usize], loss: Loss) -> f64 {
    let mut total = 0.0;
    for (s, &y) in labels.iter().enumerate() {
        let row = probs.row(s);
        total += match loss {
            Loss::NegativeLogLikelihood => -row[y].max(f64::MIN_POSITIVE).ln(),
            Loss::Squared => {
                0.5 * row
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        let t = if k == y { 1.0 } else { 0.0 };
                        (p - t) * (p - t)
                    })
                    .sum::<f64>()
            }
        };
    }
    total / labels.len() as f64
}

/// Mean loss over the batch.
pub fn batch_loss(net: &Network, x: &Matrix, labels: &[usize], loss: Loss) -> Result<f64> {
    check_labels(labels, x.rows(), net.n_classes())?;
    if labels.is_empty() {
        return Err(Error::Domain("loss of an empty batch".into()));
    }
    Ok(loss_from_probs(&forward(net, x)?.probs, labels, loss))
}

/// Mean loss and its exact gradient.
pub fn loss_and_grads(
    net: &Network,
    x: &Matrix,
    labels: &[usize],
    loss: Loss,
) -> Result<(f64, Gradients)> {
    check_labels(labels, x.rows(), net.n_classes())?;
    if labels.is_empty() {
        return Err(Error::Domain("gradient of an empty batch".into()));
    }
    let fwd = forward(net, x)?;
    let n = x.rows() as f64;
    let value = loss_from_probs(&fwd.probs, labels, loss);

    // dL/dz at the softmax input
    let classes = net.n_classes();
    let mut delta = fwd.probs.clone();
    for (s, &y) in labels.iter().enumerate() {
        let row = delta.row_mut(s);
        match loss {
            Loss::NegativeLogLikelihood => {
                row[y] -= 1.0;
                row.iter_mut().for_each(|v| *v /= n);
            }
            Loss::Squared => {
                let p: Vec<f64> = row.to_vec();
                let e: Vec<f64> = (0..classes)
                    .map(|k| p[k] - if k == y { 1.0 } else { 0.0 })
                    .collect();
                let pe: f64 = p.iter().zip(&e).map(|(a, b)| a * b).sum();
                for k in 0..classes {
                    row[k] = p[k] * (e[k] - pe) / n;
                }
            }
        }
    }

    let layer_input = |i: usize| -> &Matrix {
        if i == 0 {
            x
        } else {
            &fwd.hidden[i - 1]
        }
    };
    let head_input = layer_input(net.hidden.len());
    let head = LayerGrad {
        weights: matmul_at(&delta, head_input)?,
        bias: column_sums(&delta),
    };

    let mut hidden = Vec::with_capacity(net.hidden.len());
    let mut upstream = &net.head;
    for i in (0..net.hidden.len()).rev() {
        let back = matmul(&delta, &upstream.weights)?;
        let a = &fwd.hidden[i];
        let mut dz = back;
        for (d, &ai) in dz.data_mut().iter_mut().zip(a.data()) {
            *d *= ai * (1.0 - ai);
        }
        hidden.push(LayerGrad {
            weights: matmul_at(&dz, layer_input(i))?,
            bias: column_sums(&dz),
        });
        delta = dz;
        upstream = &net.hidden[i];
    }
    hidden.reverse();
    Ok((value, Gradients { hidden, head }))
}

/// Exact gradient of the mean batch loss.
pub fn backprop_grads(net: &Network, x: &Matrix, labels: &[usize], loss: Loss) -> Result<Gradients> {
    loss_and_grads(net, x, labels, loss).map(|(_, g)| g)
}

fn column_sums(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for row in m.row_iter() {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out
}

/// Arg-max class per row; ties go to the lowest index.
pub fn predict(net: &Network, x: &Matrix) -> Result<Vec<usize>> {
    let probs = forward(net, x)?.probs;
    Ok(probs
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect())
}

/// Fraction of misclassified samples.
pub fn evaluate(net: &Network, x: &Matrix, labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Domain("cannot evaluate on an empty set".into()));
    }
    check_labels(labels, x.rows(), net.n_classes())?;
    let wrong = predict(net, x)?
        .iter()
        .zip(labels)
        .filter(|(p, y)| p != y)
        .count();
    Ok(wrong as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneConfig {
    pub learning_rate: f64,
    pub momentum: MomentumSchedule,
    /// Weight decay on weight matrices only.
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for FineTuneConfig {
    fn default() -> Self {
        FineTuneConfig {
            learning_rate: 0.1,
            momentum: MomentumSchedule::default(),
            l2: 1e-4,
            batch_size: 100,
            epochs: 10,
            seed: 0,
            loss: Loss::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    /// One-based.
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses seen during the epoch.
    pub train_loss: f64,
    pub test_error: f64,
}

fn sgd_step(layer: &mut Layer, grad: &LayerGrad, vel: &mut LayerGrad, lr: f64, mom: f64, l2: f64) {
    let w = layer.weights.data_mut();
    let dw = vel.weights.data_mut();
    for k in 0..w.len() {
        dw[k] = mom * dw[k] - lr * (grad.weights.data()[k] + l2 * w[k]);
        w[k] += dw[k];
    }
    for ((b, db), g) in layer.bias.iter_mut().zip(vel.bias.iter_mut()).zip(&grad.bias) {
        *db = mom * *db - lr * g;
        *b += *db;
    }
}

fn zero_grad(layer: &Layer) -> LayerGrad {
    LayerGrad {
        weights: Matrix::zeros(layer.outputs(), layer.inputs()),
        bias: vec![0.0; layer.outputs()],
    }
}

/// Supervised training of every layer. Returns the trained network and a
/// report per epoch, with test error measured after each epoch.
pub fn fine_tune(
    mut net: Network,
    train: &Dataset,
    test: &Dataset,
    config: &FineTuneConfig,
) -> Result<(Network, Vec<EpochReport>)> {
    fine_tune_observed(&mut net, train, test, config, |_, _| {}).map(|r| (net, r))
}

/// As [`fine_tune`] but trains in place and calls `observe` after each epoch.
pub fn fine_tune_observed(
    net: &mut Network,
    train: &Dataset,
    test: &Dataset,
    config: &FineTuneConfig,
    mut observe: impl FnMut(&EpochReport, &Network),
) -> Result<Vec<EpochReport>> {
    if config.batch_size == 0 {
        return Err(Error::Domain("batch size must be at least 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Domain("cannot train on an empty set".into()));
    }
    let mut vel_hidden: Vec<LayerGrad> = net.hidden.iter().map(zero_grad).collect();
    let mut vel_head = zero_grad(&net.head);
    let mut reports = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mom = config.momentum.at(epoch, config.epochs);
        let plan = BatchPlan::new(train.len(), config.batch_size, config.seed, epoch as u64);
        let mut loss_sum = 0.0;
        for (b, idx) in plan.batches().enumerate() {
            let x = train.features().select_rows(idx);
            let y: Vec<usize> = idx.iter().map(|&i| train.labels()[i]).collect();
            let (loss, grads) = loss_and_grads(net, &x, &y, config.loss)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at epoch {}, batch {b}",
                    epoch + 1
                )));
            }
            loss_sum += loss * idx.len() as f64;
            for ((layer, g), v) in net.hidden.iter_mut().zip(&grads.hidden).zip(&mut vel_hidden) {
                sgd_step(layer, g, v, config.learning_rate, mom, config.l2);
            }
            sgd_step(&mut net.head, &grads.head, &mut vel_head, config.learning_rate, mom, config.l2);
            if !net.is_finite() {
                return Err(Error::Numeric(format!(
                    "parameters diverged at epoch {}, batch {b}",
                    epoch + 1
                )));
            }
        }
        let report = EpochReport {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            test_error: evaluate(net, test.features(), test.labels())?,
        };
        log::debug!(
            "fine-tune epoch {}: loss {:.5}, test error {:.4}",
            report.epoch,
            report.train_loss,
            report.test_error
        );
        observe(&report, net);
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::prop_up;

    #[test]
    fn random_init_is_seeded_with_zero_biases() {
        let a = init_random(&[6, 5, 4], 3, 11).unwrap();
        assert_eq!(a, init_random(&[6, 5, 4], 3, 11).unwrap());
        assert_ne!(a, init_random(&[6, 5, 4], 3, 12).unwrap());
        assert!(a.hidden.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert!(a.head.bias.iter().all(|&b| b == 0.0));
        assert_eq!(a.layer_sizes(), vec![6, 5, 4, 3]);
        assert_eq!(a.provenance, Provenance::Random);
        assert!(init_random(&[6, 0], 3, 1).is_err());
    }

    #[test]
    fn random_init_weight_spread() {
        let net = init_random(&[784, 500], 10, 3).unwrap();
        let w = net.hidden[0].weights.data();
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 0.01).abs() < 0.05 * 0.01, "{sd}");
    }

    #[test]
    fn stack_init_copies_hidden_layers() {
        let mut rng = Rng::new(4);
        let rbm = RbmParams::init(6, 4, &mut rng);
        let net = init_from_stack(std::slice::from_ref(&rbm), 3, 9).unwrap();
        assert_eq!(net.layer_sizes(), vec![6, 4, 3]);
        assert_eq!(net.provenance, Provenance::Pretrained);
        assert_eq!(net.decoder_bias[0], rbm.visible_bias);
        let x = Matrix::filled(2, 6, 0.7);
        assert_eq!(forward(&net, &x).unwrap().hidden[0], prop_up(&rbm, &x).unwrap());
        assert!(init_from_stack(&[], 3, 9).is_err());
        let bad = [RbmParams::init(6, 4, &mut rng), RbmParams::init(5, 2, &mut rng)];
        assert!(init_from_stack(&bad, 3, 9).is_err());
    }

    #[test]
    fn zero_network_forward() {
        let mut net = init_random(&[3, 4], 5, 1).unwrap();
        net.hidden[0].weights = Matrix::zeros(4, 3);
        net.head.weights = Matrix::zeros(5, 4);
        let f = forward(&net, &Matrix::filled(2, 3, 0.9)).unwrap();
        assert!(f.hidden[0].data().iter().all(|&v| v == 0.5));
        assert!(f.probs.data().iter().all(|&p| (p - 0.2).abs() < 1e-15));
        assert!(forward(&net, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn tiny_forward_matches_scalar_oracle() {
        let net = Network::new(
            vec![Layer {
                weights: Matrix::from_rows(&[[0.5, -1.0], [2.0, 0.25]]).unwrap(),
                bias: vec![0.1, -0.3],
            }],
            vec![vec![0.0, 0.0]],
            Layer {
                weights: Matrix::from_rows(&[[1.0, -1.0], [-0.5, 0.75]]).unwrap(),
                bias: vec![0.2, 0.0],
            },
            Provenance::Random,
        )
        .unwrap();
        let x = [0.3, 0.9];
        let sig = |t: f64| 1.0 / (1.0 + (-t).exp());
        let h0 = sig(0.5 * x[0] - 1.0 * x[1] + 0.1);
        let h1 = sig(2.0 * x[0] + 0.25 * x[1] - 0.3);
        let z0 = h0 - h1 + 0.2;
        let z1 = -0.5 * h0 + 0.75 * h1;
        let p0 = z0.exp() / (z0.exp() + z1.exp());
        let f = forward(&net, &Matrix::row_vector(&x)).unwrap();
        assert!((f.hidden[0].get(0, 0) - h0).abs() < 1e-14);
        assert!((f.hidden[0].get(0, 1) - h1).abs() < 1e-14);
        assert!((f.probs.get(0, 0) - p0).abs() < 1e-14);
        assert!((f.probs.get(0, 0) + f.probs.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_correct_prediction_has_no_gradient() {
        let mut net = init_random(&[2, 3], 2, 5).unwrap();
        net.head.weights = Matrix::zeros(2, 3);
        net.head.bias = vec![60.0, -60.0];
        let x = Matrix::filled(4, 2, 0.5);
        let g = backprop_grads(&net, &x, &[0, 0, 0, 0], Loss::NegativeLogLikelihood).unwrap();
        assert!(g.norm() < 1e-8, "{}", g.norm());
    }

    #[test]
    fn losses_give_distinct_gradients() {
        let net = init_random(&[4, 3], 3, 2).unwrap();
        let x = Matrix::filled(2, 4, 0.4);
        let a = backprop_grads(&net, &x, &[0, 2], Loss::NegativeLogLikelihood).unwrap();
        let b = backprop_grads(&net, &x, &[0, 2], Loss::Squared).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn label_guards() {
        let net = init_random(&[2], 2, 1).unwrap();
        let x = Matrix::filled(1, 2, 0.5);
        assert!(backprop_grads(&net, &x, &[2], Loss::default()).is_err());
        assert!(evaluate(&net, &x, &[5]).is_err());
        assert!(evaluate(&net, &Matrix::zeros(0, 2), &[]).is_err());
    }

    #[test]
    fn ties_break_to_lowest_class() {
        let mut net = init_random(&[2], 3, 1).unwrap();
        net.head.weights = Matrix::zeros(3, 2);
        assert_eq!(predict(&net, &Matrix::filled(3, 2, 0.5)).unwrap(), vec![0, 0, 0]);
        let x = Matrix::filled(3, 2, 0.5);
        assert_eq!(evaluate(&net, &x, &[0, 0, 0]).unwrap(), 0.0);
        assert!((evaluate(&net, &x, &[0, 1, 2]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_epochs_leave_network_unchanged() {
        let net = init_random(&[2, 2], 2, 1).unwrap();
        let d = Dataset::new(Matrix::filled(4, 2, 0.5), vec![0, 1, 0, 1], 2).unwrap();
        let config = FineTuneConfig {
            epochs: 0,
            ..Default::default()
        };
        let (out, reports) = fine_tune(net.clone(), &d, &d, &config).unwrap();
        assert_eq!(out, net);
        assert!(reports.is_empty());
    }
}
