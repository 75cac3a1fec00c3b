//! Activation sparsity analysis.
//!
//! * Hoyer sparseness, `(√n − ‖h‖₁/‖h‖₂) / (√n − 1)`, averaged over samples.
//! * Activation thresholds: the largest `τ` such that zeroing every
//!   activation with `|h_i| < τ` barely changes the layer's reconstruction
//!   `f(Wᵀh + c)`.
//! * Activation overlap: per-class binary activation vectors (mean class
//!   representation, thresholded at `τ`) and the fraction of units active in
//!   all classes of a group, averaged over every `k`-subset of classes.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{matmul, row_mean, sigmoid_scalar, Matrix};

/// Default reconstruction budget for threshold calibration.
pub const DEFAULT_BUDGET: f64 = 0.05;
/// Number of pooled quantiles tried as thresholds.
pub const THRESHOLD_CANDIDATES: usize = 1000;
/// Default number of samples used for threshold calibration.
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 1000;

/// Hoyer sparseness of `h`. An all-zero vector counts as maximally sparse.
pub fn hspm(h: &[f64]) -> Result<f64> {
    let n = h.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "sparseness needs at least 2 entries, got {n}"
        )));
    }
    let l1: f64 = h.iter().map(|v| v.abs()).sum();
    let l2 = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Ok(1.0);
    }
    let root_n = (n as f64).sqrt();
    // rounding can push a one-hot or uniform vector a hair outside [0, 1]
    Ok(((root_n - l1 / l2) / (root_n - 1.0)).clamp(0.0, 1.0))
}

/// Mean per-row Hoyer sparseness.
pub fn mean_hspm(acts: &Matrix) -> Result<f64> {
    if acts.rows() == 0 {
        return Err(Error::Domain("mean sparseness of zero samples".into()));
    }
    let mut total = 0.0;
    for row in acts.row_iter() {
        total += hspm(row)?;
    }
    Ok(total / acts.rows() as f64)
}

/// The map from a layer's activations back to its input space.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    /// `d_h × d_x`, the layer's own weights.
    pub weights: Matrix,
    /// `c`, or zeros when the layer has no visible bias.
    pub visible_bias: Vec<f64>,
}

impl Decoder {
    pub fn new(weights: Matrix, visible_bias: Vec<f64>) -> Result<Self> {
        if visible_bias.len() != weights.cols() {
            return Err(Error::Shape {
                op: "Decoder::new",
                left: weights.shape(),
                right: (1, visible_bias.len()),
            });
        }
        Ok(Decoder {
            weights,
            visible_bias,
        })
    }

    fn check(&self, acts: &Matrix) -> Result<()> {
        if acts.cols() != self.weights.rows() {
            return Err(Error::Shape {
                op: "decoder",
                left: acts.shape(),
                right: self.weights.shape(),
            });
        }
        Ok(())
    }

    /// `f(hW + c)` for each row `h`.
    pub fn reconstruct(&self, acts: &Matrix) -> Result<Matrix> {
        self.check(acts)?;
        let mut pre = matmul(acts, &self.weights)?;
        pre.add_row_broadcast(&self.visible_bias)?;
        Ok(pre.map(sigmoid_scalar))
    }
}

/// One hidden layer's activations with what is needed to analyse them.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivations {
    /// One-based layer index.
    pub layer: usize,
    /// `samples × units`, entries in `[0, 1]`.
    pub activations: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub decoder: Decoder,
}

impl LayerActivations {
    pub fn new(
        layer: usize,
        activations: Matrix,
        labels: Vec<usize>,
        classes: usize,
        decoder: Decoder,
    ) -> Result<Self> {
        if labels.len() != activations.rows() {
            return Err(Error::Domain(format!(
                "{} labels for {} activation rows",
                labels.len(),
                activations.rows()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Domain(format!("label {l} outside [0, {classes})")));
        }
        decoder.check(&activations)?;
        Ok(LayerActivations {
            layer,
            activations,
            labels,
            classes,
            decoder,
        })
    }

    pub fn mean_hspm(&self) -> Result<f64> {
        mean_hspm(&self.activations)
    }

    /// Rows belonging to `class`.
    pub fn class_rows(&self, class: usize) -> Matrix {
        let idx: Vec<usize> = (0..self.labels.len())
            .filter(|&i| self.labels[i] == class)
            .collect();
        self.activations.select_rows(&idx)
    }
}

/// Keeps entries with `|h_i| ≥ τ` and zeroes the rest.
pub fn threshold_representation(h: &[f64], tau: f64) -> Vec<f64> {
    h.iter()
        .map(|&v| if v.abs() >= tau { v } else { 0.0 })
        .collect()
}

/// Candidate thresholds: the nearest-rank quantiles `q/1000`, `q = 1..=1000`,
/// of all `|h|` values, deduplicated and sorted descending.
pub fn threshold_candidates(acts: &Matrix) -> Vec<f64> {
    let mut pooled: Vec<f64> = acts.data().iter().map(|v| v.abs()).collect();
    if pooled.is_empty() {
        return Vec::new();
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    let mut out: Vec<f64> = (1..=THRESHOLD_CANDIDATES)
        .map(|q| {
            let rank = (q * n).div_ceil(THRESHOLD_CANDIDATES);
            pooled[rank.clamp(1, n) - 1]
        })
        .collect();
    out.dedup();
    out.reverse();
    out
}

/// Mean over rows of `‖f(sW + c) − f(hW + c)‖²`, `s` being `h` thresholded
/// at `τ`.
pub fn reconstruction_deviation(acts: &Matrix, decoder: &Decoder, tau: f64) -> Result<f64> {
    if acts.rows() == 0 {
        return Err(Error::Domain("deviation of zero samples".into()));
    }
    let full = decoder.reconstruct(acts)?;
    let mut thresholded = acts.clone();
    for v in thresholded.data_mut() {
        if v.abs() < tau {
            *v = 0.0;
        }
    }
    let partial = decoder.reconstruct(&thresholded)?;
    let sq: f64 = full
        .data()
        .iter()
        .zip(partial.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq / acts.rows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub tau: f64,
    /// Mean reconstruction deviation at `tau`.
    pub deviation: f64,
    /// False when no candidate met the budget and `tau` fell back to 0.
    pub within_budget: bool,
}

/// Per-row deviation for every candidate. Within a row, entries are added to
/// the thresholded pre-activation in descending `|h|` order, and the row's
/// deviation is only recomputed when its support changes.
fn row_deviations(h: &[f64], decoder: &Decoder, candidates: &[f64]) -> Vec<f64> {
    let d_x = decoder.weights.cols();
    let mut full = decoder.visible_bias.clone();
    for (j, &hj) in h.iter().enumerate() {
        for (f, w) in full.iter_mut().zip(decoder.weights.row(j)) {
            *f += hj * w;
        }
    }
    let target: Vec<f64> = full.iter().map(|&t| sigmoid_scalar(t)).collect();

    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].abs().total_cmp(&h[a].abs()).then(a.cmp(&b)));

    let mut pre = decoder.visible_bias.clone();
    let mut next = 0;
    let mut current: Option<f64> = None;
    let mut out = Vec::with_capacity(candidates.len());
    for &tau in candidates {
        let mut changed = false;
        while next < order.len() && h[order[next]].abs() >= tau {
            let j = order[next];
            for (p, w) in pre.iter_mut().zip(decoder.weights.row(j)) {
                *p += h[j] * w;
            }
            next += 1;
            changed = true;
        }
        let dev = match current {
            Some(d) if !changed => d,
            _ => {
                let mut sq = 0.0;
                for i in 0..d_x {
                    let diff = sigmoid_scalar(pre[i]) - target[i];
                    sq += diff * diff;
                }
                sq
            }
        };
        current = Some(dev);
        out.push(dev);
    }
    out
}

/// Largest candidate `τ` whose mean reconstruction deviation is strictly below
/// `budget`. Falls back to `τ = 0` (flagged) when none qualifies.
pub fn calibrate_threshold(acts: &Matrix, decoder: &Decoder, budget: f64) -> Result<Calibration> {
    decoder.check(acts)?;
    if acts.rows() == 0 {
        return Err(Error::Domain("calibration needs at least one sample".into()));
    }
    let candidates = threshold_candidates(acts);
    let per_row: Vec<Vec<f64>> = (0..acts.rows())
        .into_par_iter()
        .map(|r| row_deviations(acts.row(r), decoder, &candidates))
        .collect();
    let n = acts.rows() as f64;
    for (c, &tau) in candidates.iter().enumerate() {
        let mut total = 0.0;
        for row in &per_row {
            total += row[c];
        }
        let deviation = total / n;
        if deviation < budget {
            return Ok(Calibration {
                tau,
                deviation,
                within_budget: true,
            });
        }
    }
    log::warn!("no activation threshold meets the reconstruction budget {budget}; using 0");
    Ok(Calibration {
        tau: 0.0,
        deviation: 0.0,
        within_budget: false,
    })
}

/// Which units are active (`|h_i| ≥ τ`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryActivationVector {
    pub bits: Vec<u8>,
}

impl BinaryActivationVector {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

pub fn binarize(h: &[f64], tau: f64) -> BinaryActivationVector {
    BinaryActivationVector {
        bits: h.iter().map(|v| u8::from(v.abs() >= tau)).collect(),
    }
}

/// Binary vector of the mean representation of one class's samples.
pub fn class_vector(class_acts: &Matrix, tau: f64) -> Result<BinaryActivationVector> {
    if class_acts.rows() == 0 {
        return Err(Error::Domain("class vector of an empty class".into()));
    }
    Ok(binarize(row_mean(class_acts)?.data(), tau))
}

/// Fraction of positions where every vector has a 1.
pub fn aod(vectors: &[BinaryActivationVector]) -> Result<f64> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Domain("overlap of an empty set of vectors".into()))?;
    if first.is_empty() {
        return Err(Error::Domain("overlap of zero-length vectors".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != first.len()) {
        return Err(Error::Domain(format!(
            "activation vectors of lengths {} and {}",
            first.len(),
            v.len()
        )));
    }
    let shared = (0..first.len())
        .filter(|&i| vectors.iter().all(|v| v.bits[i] == 1))
        .count();
    Ok(shared as f64 / first.len() as f64)
}

/// Mean overlap over every `k`-combination of the class vectors.
pub fn average_aod(class_vectors: &[BinaryActivationVector], k: usize) -> Result<f64> {
    let m = class_vectors.len();
    if k < 2 || k > m {
        return Err(Error::Domain(format!("k = {k} outside [2, {m}]")));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for combo in class_vectors.iter().cloned().combinations(k) {
        total += aod(&combo)?;
        count += 1;
    }
    Ok(total / count as f64)
}

/// Average overlap for each `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AodCurve {
    pub layer: usize,
    pub tau: f64,
    pub points: Vec<(usize, f64)>,
}

/// Everything computed for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAnalysis {
    pub layer: usize,
    pub mean_hspm: f64,
    pub calibration: Calibration,
    pub class_vectors: Vec<BinaryActivationVector>,
}

impl LayerAnalysis {
    pub fn average_aod(&self, k: usize) -> Result<f64> {
        average_aod(&self.class_vectors, k)
    }

    /// Curve over `k` in `ks`, each clipped to `[2, classes]`.
    pub fn aod_curve(&self, ks: impl IntoIterator<Item = usize>) -> Result<AodCurve> {
        let points = ks
            .into_iter()
            .map(|k| self.average_aod(k).map(|v| (k, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(AodCurve {
            layer: self.layer,
            tau: self.calibration.tau,
            points,
        })
    }
}

/// Sparseness of all rows, a threshold calibrated on the first
/// `calibration_samples` rows, and one binary vector per class.
pub fn analyze_layer(
    acts: &LayerActivations,
    budget: f64,
    calibration_samples: usize,
) -> Result<LayerAnalysis> {
    let calibration_set = acts.activations.head(calibration_samples.max(1));
    let calibration = calibrate_threshold(&calibration_set, &acts.decoder, budget)?;
    let class_vectors = (0..acts.classes)
        .map(|c| class_vector(&acts.class_rows(c), calibration.tau))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage(format!("layer {} class vectors", acts.layer)))?;
    Ok(LayerAnalysis {
        layer: acts.layer,
        mean_hspm: acts.mean_hspm()?,
        calibration,
        class_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bav(bits: &[u8]) -> BinaryActivationVector {
        BinaryActivationVector {
            bits: bits.to_vec(),
        }
    }

    #[test]
    fn hspm_reference_values() {
        assert_eq!(hspm(&[0.3; 4]).unwrap(), 0.0);
        assert_eq!(hspm(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        let expected = (2f64.sqrt() - 7.0 / 5.0) / (2f64.sqrt() - 1.0);
        assert!((hspm(&[3.0, 4.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.0343).abs() < 1e-4);
        assert_eq!(hspm(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(hspm(&[1.0]).is_err());
    }

    #[test]
    fn mean_hspm_cases() {
        let same = Matrix::from_rows(&[[0.2, 0.4, 0.0], [0.2, 0.4, 0.0]]).unwrap();
        assert_eq!(mean_hspm(&same).unwrap(), hspm(&[0.2, 0.4, 0.0]).unwrap());
        let mixed = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.5, 0.5]]).unwrap();
        assert_eq!(mean_hspm(&mixed).unwrap(), 0.5);
        assert!(mean_hspm(&Matrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn binarize_definition() {
        assert_eq!(binarize(&[0.2, 0.05, 0.5], 0.1), bav(&[1, 0, 1]));
        assert_eq!(binarize(&[0.0, 0.3], 0.0), bav(&[1, 1]));
        assert_eq!(binarize(&[0.2, 0.3], 0.31), bav(&[0, 0]));
        // ties count as active
        assert_eq!(binarize(&[0.25], 0.25), bav(&[1]));
    }

    #[test]
    fn aod_definition() {
        assert_eq!(aod(&[bav(&[1, 1]), bav(&[1, 1])]).unwrap(), 1.0);
        assert_eq!(aod(&[bav(&[1, 0]), bav(&[0, 1])]).unwrap(), 0.0);
        assert_eq!(aod(&[bav(&[1, 1, 0, 1]), bav(&[1, 0, 0, 1])]).unwrap(), 0.5);
        assert!(aod(&[bav(&[1]), bav(&[1, 0])]).is_err());
        assert!(aod(&[]).is_err());
    }

    #[test]
    fn average_aod_edges() {
        let vs = vec![bav(&[1, 1, 0, 1]), bav(&[1, 0, 0, 1]), bav(&[0, 1, 1, 1])];
        assert_eq!(average_aod(&vs, 3).unwrap(), aod(&vs).unwrap());
        // pairs: {0,1} 2/4, {0,2} 2/4, {1,2} 1/4
        assert!((average_aod(&vs, 2).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!(average_aod(&vs, 1).is_err());
        assert!(average_aod(&vs, 4).is_err());
        let same = vec![bav(&[1, 0, 1, 1]); 5];
        for k in 2..=5 {
            assert_eq!(average_aod(&same, k).unwrap(), 0.75);
        }
    }

    #[test]
    fn class_vector_cases() {
        let one = Matrix::from_rows(&[[0.9, 0.1, 0.6]]).unwrap();
        assert_eq!(class_vector(&one, 0.5).unwrap(), binarize(one.row(0), 0.5));
        let two = Matrix::from_rows(&[[0.9, 0.1, 0.6], [0.8, 0.2, 0.7]]).unwrap();
        assert_eq!(class_vector(&two, 0.5).unwrap(), bav(&[1, 0, 1]));
        assert!(class_vector(&Matrix::zeros(0, 3), 0.5).is_err());
    }

    #[test]
    fn binary_activations_keep_top_threshold() {
        let acts = Matrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        let dec = Decoder::new(
            Matrix::from_rows(&[[0.5, -1.0], [2.0, 0.3], [-0.7, 0.1]]).unwrap(),
            vec![0.1, -0.2],
        )
        .unwrap();
        let cal = calibrate_threshold(&acts, &dec, DEFAULT_BUDGET).unwrap();
        assert_eq!(cal.tau, 1.0);
        assert_eq!(cal.deviation, 0.0);
        assert!(cal.within_budget);
    }

    #[test]
    fn unbounded_budget_takes_max() {
        let acts = Matrix::from_rows(&[[0.2, 0.9, 0.4], [0.3, 0.1, 0.6]]).unwrap();
        let dec = Decoder::new(Matrix::filled(3, 2, 1.0), vec![0.0, 0.0]).unwrap();
        let cal = calibrate_threshold(&acts, &dec, f64::INFINITY).unwrap();
        assert_eq!(cal.tau, 0.9);
    }

    #[test]
    fn impossible_budget_falls_back_to_zero() {
        let acts = Matrix::from_rows(&[[0.2, 0.9]]).unwrap();
        let dec = Decoder::new(Matrix::filled(2, 2, 1.0), vec![0.0, 0.0]).unwrap();
        let cal = calibrate_threshold(&acts, &dec, 0.0).unwrap();
        assert_eq!(cal.tau, 0.0);
        assert!(!cal.within_budget);
    }

    #[test]
    fn candidates_are_descending_quantiles() {
        let acts = Matrix::from_rows(&[[0.1, 0.4], [0.3, 0.2]]).unwrap();
        assert_eq!(threshold_candidates(&acts), vec![0.4, 0.3, 0.2, 0.1]);
        let big = Matrix::new(1, 5000, (0..5000).map(|i| i as f64 / 5000.0).collect()).unwrap();
        let c = threshold_candidates(&big);
        assert_eq!(c.len(), THRESHOLD_CANDIDATES);
        assert_eq!(c[0], 4999.0 / 5000.0);
        assert_eq!(*c.last().unwrap(), 4.0 / 5000.0);
    }

    #[test]
    fn layer_analysis_end_to_end() {
        let acts = Matrix::from_rows(&[
            [0.9, 0.1, 0.8, 0.05],
            [0.85, 0.2, 0.9, 0.1],
            [0.1, 0.9, 0.8, 0.05],
            [0.2, 0.95, 0.7, 0.1],
        ])
        .unwrap();
        let dec = Decoder::new(Matrix::filled(4, 3, 0.5), vec![0.0; 3]).unwrap();
        let la = LayerActivations::new(1, acts, vec![0, 0, 1, 1], 2, dec).unwrap();
        let a = analyze_layer(&la, DEFAULT_BUDGET, 1000).unwrap();
        assert_eq!(a.class_vectors.len(), 2);
        let curve = a.aod_curve(2..=2).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!((0.0..=1.0).contains(&curve.points[0].1));
    }

    proptest! {
        #[test]
        fn hspm_scale_invariant(v in prop::collection::vec(-5.0f64..5.0, 2..30), alpha in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0]) {
            let scaled: Vec<f64> = v.iter().map(|x| x * alpha).collect();
            prop_assert!((hspm(&v).unwrap() - hspm(&scaled).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn hspm_in_unit_interval(v in prop::collection::vec(-5.0f64..5.0, 2..30)) {
            let s = hspm(&v).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn adding_vectors_never_raises_overlap(bits in prop::collection::vec(prop::collection::vec(0u8..2, 12), 2..6)) {
            let vs: Vec<_> = bits.iter().map(|b| bav(b)).collect();
            for i in 1..vs.len() {
                prop_assert!(aod(&vs[..=i]).unwrap() <= aod(&vs[..i]).unwrap());
            }
        }

        #[test]
        fn binarize_idempotent_on_bits(h in prop::collection::vec(0.0f64..1.0, 1..20), tau in 1e-6f64..=1.0) {
            let once = binarize(&h, tau);
            let as_f: Vec<f64> = once.bits.iter().map(|&b| b as f64).collect();
            prop_assert_eq!(binarize(&as_f, tau), once);
        }
    }
}
