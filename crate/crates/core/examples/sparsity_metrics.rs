//! Hoyer sparseness, threshold calibration and activation overlap on the
//! hidden layer of a pretrained RBM.

use rbm_sparsity::data::synth_bars;
use rbm_sparsity::metrics::{analyze_layer, hspm, Decoder, LayerActivations, DEFAULT_BUDGET};
use rbm_sparsity::rbm::{prop_up, train_rbm, RbmTrainConfig};
use rbm_sparsity::Result;

/// Returns the average overlap for `k = 2..=classes`.
pub fn run() -> Result<Vec<f64>> {
    println!("HSPM of a one-hot vector: {}", hspm(&[0.0, 0.0, 1.0, 0.0])?);
    println!("HSPM of a flat vector:    {}", hspm(&[0.5; 4])?);

    let data = synth_bars(40, 5, 0.05, 21)?;
    let config = RbmTrainConfig {
        batch_size: 20,
        epochs: 20,
        seed: 1,
        ..RbmTrainConfig::default()
    };
    let rbm = train_rbm(data.features(), 120, &config)?.params;

    let acts = LayerActivations::new(
        1,
        prop_up(&rbm, data.features())?,
        data.labels().to_vec(),
        data.classes(),
        Decoder::new(rbm.weights.clone(), rbm.visible_bias.clone())?,
    )?;
    let analysis = analyze_layer(&acts, DEFAULT_BUDGET, 200)?;
    println!(
        "mean HSPM {:.4}, threshold {:.4} (deviation {:.4})",
        analysis.mean_hspm, analysis.calibration.tau, analysis.calibration.deviation
    );
    for (c, v) in analysis.class_vectors.iter().enumerate() {
        println!("class {c}: {} of {} units active", v.count_ones(), v.len());
    }
    let curve = analysis.aod_curve(2..=data.classes())?;
    for (k, a) in &curve.points {
        println!("average AOD, k = {k}: {a:.4}");
    }
    Ok(curve.points.iter().map(|p| p.1).collect())
}

fn main() -> Result<()> {
    run().map(|_| ())
}
