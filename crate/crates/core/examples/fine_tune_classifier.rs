//! A randomly initialised sigmoid network against one initialised from a
//! pretrained RBM stack, both trained with backprop on the same data.

use rbm_sparsity::data::synth_bars;
use rbm_sparsity::network::{evaluate, fine_tune, init_from_stack, init_random, FineTuneConfig};
use rbm_sparsity::rbm::{pretrain_stack, RbmTrainConfig};
use rbm_sparsity::Result;

/// Returns `(random-init test error, pretrained test error)`.
pub fn run() -> Result<(f64, f64)> {
    let all = synth_bars(60, 5, 0.1, 8)?;
    let train = all.head(250);
    let test = all.select(&(250..all.len()).collect::<Vec<_>>());

    let tune = FineTuneConfig {
        batch_size: 25,
        epochs: 15,
        seed: 2,
        ..FineTuneConfig::default()
    };

    let random = init_random(&[train.dims(), 80, 80], train.classes(), 1)?;
    let (random, _) = fine_tune(random, &train, &test, &tune)?;

    let pre = RbmTrainConfig {
        batch_size: 25,
        epochs: 15,
        seed: 4,
        ..RbmTrainConfig::default()
    };
    let stack: Vec<_> = pretrain_stack(train.features(), &[80, 80], &pre)?
        .into_iter()
        .map(|t| t.params)
        .collect();
    let dbn = init_from_stack(&stack, train.classes(), 3)?;
    let (dbn, reports) = fine_tune(dbn, &train, &test, &tune)?;
    for r in reports.iter().step_by(5) {
        println!(
            "pretrained, epoch {:>2}: train loss {:.4}, test error {:.3}",
            r.epoch, r.train_loss, r.test_error
        );
    }

    let e_random = evaluate(&random, test.features(), test.labels())?;
    let e_dbn = evaluate(&dbn, test.features(), test.labels())?;
    println!("test error: random init {e_random:.3}, pretrained {e_dbn:.3}");
    Ok((e_random, e_dbn))
}

fn main() -> Result<()> {
    run().map(|_| ())
}
