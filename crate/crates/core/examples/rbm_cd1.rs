//! Train a small RBM with CD-1 and watch the exact log-likelihood rise.
//!
//! ```text
//! cargo run --example rbm_cd1
//! ```

use rbm_sparsity::rbm::{exact_log_likelihood, train_rbm_observed, RbmParams, RbmTrainConfig};
use rbm_sparsity::{Matrix, Result, Rng};

/// Returns the log-likelihood before and after training.
pub fn run() -> Result<(f64, f64)> {
    let patterns = Matrix::from_rows(&[
        [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        [1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
    ])?;
    let config = RbmTrainConfig {
        learning_rate: 0.1,
        batch_size: 4,
        epochs: 500,
        seed: 11,
        ..RbmTrainConfig::default()
    };

    // train_rbm draws the initial weights from the first values of its rng
    let init = RbmParams::init(6, 4, &mut Rng::new(config.seed));
    let before = exact_log_likelihood(&init, &patterns)?;

    let trained = train_rbm_observed(&patterns, 4, &config, |stats, _| {
        if stats.epoch % 100 == 0 {
            println!(
                "epoch {:>3}  reconstruction error {:.4}",
                stats.epoch, stats.reconstruction_error
            );
        }
    })?;
    let after = exact_log_likelihood(&trained.params, &patterns)?;
    println!("mean log p(x): {before:.4} -> {after:.4}");
    Ok((before, after))
}

fn main() -> Result<()> {
    run().map(|_| ())
}
