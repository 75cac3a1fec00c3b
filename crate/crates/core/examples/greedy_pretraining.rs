//! Greedy layer-wise pretraining of an RBM stack on synthetic bars, with the
//! mean Hoyer sparseness of each layer's hidden probabilities.

use rbm_sparsity::data::synth_bars;
use rbm_sparsity::metrics::mean_hspm;
use rbm_sparsity::rbm::{pretrain_stack, prop_up, RbmTrainConfig};
use rbm_sparsity::Result;

/// Returns the mean HSPM of the input and of each trained layer.
pub fn run() -> Result<Vec<f64>> {
    let data = synth_bars(50, 6, 0.05, 3)?;
    let config = RbmTrainConfig {
        batch_size: 20,
        epochs: 15,
        seed: 5,
        ..RbmTrainConfig::default()
    };
    let stack = pretrain_stack(data.features(), &[100, 50], &config)?;

    let mut input = data.features().clone();
    let mut hspm = vec![mean_hspm(&input)?];
    println!("input      HSPM {:.4}", hspm[0]);
    for (l, layer) in stack.iter().enumerate() {
        input = prop_up(&layer.params, &input)?;
        hspm.push(mean_hspm(&input)?);
        let last = layer.stats.last().expect("at least one epoch");
        println!(
            "layer {}    HSPM {:.4}   reconstruction error {:.4}",
            l + 1,
            hspm[l + 1],
            last.reconstruction_error
        );
    }
    Ok(hspm)
}

fn main() -> Result<()> {
    run().map(|_| ())
}
