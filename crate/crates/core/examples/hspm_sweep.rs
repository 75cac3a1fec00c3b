//! Hidden-layer sparseness of single RBMs of several widths over training.

use rbm_sparsity::experiment::{compute_sweep, load_data, parse_config, SweepRow};
use rbm_sparsity::Result;

const CONFIG: &str = r#"
layers = [50]

[data]
source = "synthetic"
classes = 8
train_per_class = 40
test_per_class = 20

[pretrain]
epochs = 20
batch_size = 20

[sweep]
hidden_sizes = [25, 100]
record_every = 5
"#;

pub fn run() -> Result<Vec<SweepRow>> {
    let config = parse_config(CONFIG, std::path::Path::new("."))?;
    let data = load_data(&config, None)?;
    let rows = compute_sweep(&config, &data)?;
    println!("setting     epoch   hspm");
    for r in &rows {
        println!("{:<11} {:>5}   {:.4}", r.setting, r.epoch, r.hspm);
    }
    Ok(rows)
}

fn main() -> Result<()> {
    run().map(|_| ())
}
