//! A complete config-driven experiment on synthetic bars: all three network
//! variants, per-layer sparseness and overlap, CSV reports and saved models.
//!
//! The same run is available from the command line:
//!
//! ```text
//! cargo run --release -- experiment configs/bars.toml
//! ```

use rbm_sparsity::experiment::{parse_config, run_experiment, summary_table, ExperimentReport};
use rbm_sparsity::{Error, Result};

const CONFIG: &str = r#"
seed = 7
output = "bars"
layers = [120, 120]

[data]
source = "synthetic"
classes = 6
train_per_class = 60
test_per_class = 30
noise = 0.05

[pretrain]
epochs = 10
batch_size = 20

[finetune]
epochs = 8
batch_size = 20

[metrics]
calibration_samples = 180
"#;

pub fn run() -> Result<ExperimentReport> {
    let dir = tempfile::tempdir().map_err(|e| Error::Domain(e.to_string()))?;
    let config = parse_config(CONFIG, dir.path())?;
    let report = run_experiment(&config)?;
    print!("{}", summary_table(&report));
    let mut files: Vec<String> = std::fs::read_dir(&config.output)
        .map_err(|e| Error::Domain(e.to_string()))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    println!("wrote {}", files.join(", "));
    Ok(report)
}

fn main() -> Result<()> {
    run().map(|_| ())
}
