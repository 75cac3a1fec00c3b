use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbm_sparsity::data::{load_csv_features, load_idx_dataset};
use rbm_sparsity::experiment::{
    describe_model, run_experiment, run_hspm_sweep, run_metrics, summary_table, validate_config,
    ExperimentConfig, MetricsOptions,
};
use rbm_sparsity::model_io::load_model;
use rbm_sparsity::{Error, Result};

#[derive(Parser)]
#[command(version, about = "RBM pretraining and hidden-activation sparsity analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Replace the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 = sequential).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured variants and write HSPM, AOD and error reports.
    Experiment {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Record RBM layer HSPM over epochs for several widths or depths.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Measure a saved model on IDX images (with --labels) or a CSV file.
    Metrics {
        model: PathBuf,
        data: PathBuf,
        /// IDX label file matching the image file.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Number of classes for IDX data.
        #[arg(long, default_value_t = 10)]
        classes: usize,
        /// Feature columns for CSV data.
        #[arg(long, default_value_t = 16)]
        features: usize,
        #[arg(long, default_value_t = rbm_sparsity::metrics::DEFAULT_BUDGET)]
        budget: f64,
        #[arg(long, default_value = "metrics_out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print a saved model's structure.
    Inspect { model: PathBuf },
}

fn load_config(path: &Path, o: Overrides) -> Result<ExperimentConfig> {
    let mut config = validate_config(path)?;
    if let Some(seed) = o.seed {
        config.seed = seed;
        config.pretrain.seed = seed;
    }
    if let Some(out) = o.out {
        config.output = out;
    }
    if let Some(t) = o.threads {
        if t == 0 {
            return Err(Error::Config(vec!["--threads must be at least 1".into()]));
        }
        config.threads = t;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Experiment { config, overrides } => {
            let config = load_config(&config, overrides)?;
            let report = run_experiment(&config)?;
            print!("{}", summary_table(&report));
            println!("reports written to {}", config.output.display());
        }
        Command::Sweep { config, overrides } => {
            let config = load_config(&config, overrides)?;
            let rows = run_hspm_sweep(&config)?;
            println!(
                "{} rows written to {}",
                rows.len(),
                config.output.join("sweep.csv").display()
            );
        }
        Command::Metrics {
            model,
            data,
            labels,
            classes,
            features,
            budget,
            out,
            threads,
        } => {
            let model = load_model(&model)?;
            let is_csv = data.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let dataset = match (is_csv, labels) {
                (true, _) => load_csv_features(&data, features),
                (false, Some(labels)) => load_idx_dataset(&data, &labels, classes),
                (false, None) => Err(Error::Config(vec![
                    "IDX data needs --labels (or pass a .csv file)".into(),
                ])),
            }
            .map_err(|e| e.in_stage("data"))?;
            let options = MetricsOptions {
                budget,
                ..MetricsOptions::default()
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Config(vec![e.to_string()]))?;
            let analyses = pool.install(|| run_metrics(&model, &dataset, &options, &out))?;
            for a in &analyses {
                println!(
                    "layer {}: mean HSPM {:.4}, tau {:.6}, AOD(k=2) {:.4}",
                    a.layer,
                    a.mean_hspm,
                    a.calibration.tau,
                    a.average_aod(2)?
                );
            }
        }
        Command::Inspect { model } => print!("{}", describe_model(&load_model(&model)?)),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
