//! Config-driven runs: build the three network variants, measure them, and
//! write CSV reports.
//!
//! Seeds are fixed offsets from the master seed, so each branch is
//! reproducible on its own:
//!
//! | use                     | seed            |
//! |-------------------------|-----------------|
//! | data (split, noise)     | `seed`          |
//! | Dsigm initialisation    | `seed + 1`      |
//! | Dsigm training order    | `seed + 2`      |
//! | classifier head (DpRBMs)| `seed + 3`      |
//! | DBN fine-tuning order   | `seed + 4`      |
//! | RBM layer `l` (0-based) | `seed + 1000 + l` |

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{
    parse_config, validate_config, DataSource, ExperimentConfig, MetricsOptions, SweepOptions,
    Variant,
};

use crate::data::{
    load_csv_features, load_idx_dataset, split_dataset, synth_bars, write_split_manifest, Dataset,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{analyze_layer, mean_hspm, Decoder, LayerActivations, LayerAnalysis};
use crate::model_io::{save_model, Model};
use crate::network::{
    evaluate, fine_tune_observed, forward, init_from_stack, init_random, EpochReport,
    FineTuneConfig, Network,
};
use crate::rbm::{prop_up, train_rbm_observed, RbmParams, RbmTrainConfig};

pub const SEED_DSIGM_INIT: u64 = 1;
pub const SEED_DSIGM_TRAIN: u64 = 2;
pub const SEED_HEAD: u64 = 3;
pub const SEED_FINE_TUNE: u64 = 4;
pub const SEED_PRETRAIN: u64 = 1000;

/// Train and evaluation splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub test: Dataset,
}

/// Loads the configured data. For CSV sources the split assignment is
/// written to `split.csv` in `manifest_dir` when one is given.
pub fn load_data(config: &ExperimentConfig, manifest_dir: Option<&Path>) -> Result<Splits> {
    match &config.data {
        DataSource::Synthetic {
            classes,
            train_per_class,
            test_per_class,
            noise,
        } => {
            // Labels cycle through the classes, so any prefix of whole cycles
            // is balanced.
            let all = synth_bars(train_per_class + test_per_class, *classes, *noise, config.seed)?;
            let n_train = train_per_class * classes;
            let train: Vec<usize> = (0..n_train).collect();
            let test: Vec<usize> = (n_train..all.len()).collect();
            Ok(Splits {
                train: all.select(&train),
                test: all.select(&test),
            })
        }
        DataSource::Mnist {
            train_images,
            train_labels,
            test_images,
            test_labels,
            train_limit,
            test_limit,
        } => {
            let mut train = load_idx_dataset(train_images, train_labels, 10)?;
            let mut test = load_idx_dataset(test_images, test_labels, 10)?;
            if let Some(n) = train_limit {
                train = train.head(*n);
            }
            if let Some(n) = test_limit {
                test = test.head(*n);
            }
            Ok(Splits { train, test })
        }
        DataSource::Csv {
            path,
            features,
            test_fraction,
        } => {
            let all = load_csv_features(path, *features)?;
            let (train, test, assignment) = split_dataset(&all, *test_fraction, config.seed)?;
            if let Some(dir) = manifest_dir {
                write_split_manifest(dir.join("split.csv"), &assignment)?;
            }
            if train.is_empty() || test.is_empty() {
                return Err(Error::Domain(format!(
                    "split of {} samples left an empty side",
                    all.len()
                )));
            }
            Ok(Splits { train, test })
        }
    }
}

/// Mean HSPM of one layer at one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HspmPoint {
    /// One-based; 0 is the input data.
    pub layer: usize,
    pub epoch: usize,
    pub hspm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    pub network: Network,
    /// Per-layer analysis on the evaluation split.
    pub analyses: Vec<LayerAnalysis>,
    pub test_error: f64,
    /// Empty for variants without supervised training.
    pub epochs: Vec<EpochReport>,
    pub hspm_history: Vec<HspmPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub classes: usize,
    pub k_range: (usize, usize),
    /// Mean HSPM of the evaluation inputs.
    pub dataset_hspm: f64,
    pub variants: Vec<VariantResult>,
    pub rbm_stack: Option<Vec<RbmParams>>,
}

impl ExperimentReport {
    pub fn variant(&self, v: Variant) -> Option<&VariantResult> {
        self.variants.iter().find(|r| r.variant == v)
    }
}

/// Hidden activations of every layer with the decoder that maps each back to
/// its input.
pub fn network_layers(net: &Network, x: &Matrix) -> Result<Vec<(Matrix, Decoder)>> {
    let fwd = forward(net, x)?;
    fwd.hidden
        .into_iter()
        .zip(net.hidden.iter().zip(&net.decoder_bias))
        .map(|(acts, (layer, c))| Ok((acts, Decoder::new(layer.weights.clone(), c.clone())?)))
        .collect()
}

/// As [`network_layers`] for a bare RBM stack.
pub fn stack_layers(stack: &[RbmParams], x: &Matrix) -> Result<Vec<(Matrix, Decoder)>> {
    let mut input = x.clone();
    let mut out = Vec::with_capacity(stack.len());
    for p in stack {
        let acts = prop_up(p, &input)?;
        out.push((
            acts.clone(),
            Decoder::new(p.weights.clone(), p.visible_bias.clone())?,
        ));
        input = acts;
    }
    Ok(out)
}

/// Analyses every layer against `data`'s labels.
pub fn analyze_layers(
    layers: Vec<(Matrix, Decoder)>,
    data: &Dataset,
    options: &MetricsOptions,
) -> Result<Vec<LayerAnalysis>> {
    layers
        .into_iter()
        .enumerate()
        .map(|(i, (acts, decoder))| {
            let la = LayerActivations::new(
                i + 1,
                acts,
                data.labels().to_vec(),
                data.classes(),
                decoder,
            )?;
            let a = analyze_layer(&la, options.budget, options.calibration_samples)?;
            if !a.calibration.within_budget {
                log::warn!(
                    "layer {}: no threshold met the reconstruction budget {}; using 0",
                    i + 1,
                    options.budget
                );
            }
            Ok(a)
        })
        .collect()
}

/// Greedy pretraining with layer HSPM on `eval` recorded after every
/// `record_every`-th epoch (and the last). `record(layer, epoch, hspm)` gets a
/// one-based layer.
pub fn pretrain_tracked(
    train: &Matrix,
    eval: &Matrix,
    sizes: &[usize],
    config: &RbmTrainConfig,
    record_every: usize,
    mut record: impl FnMut(usize, usize, f64),
) -> Result<Vec<RbmParams>> {
    let mut stack = Vec::with_capacity(sizes.len());
    let mut train_in = train.clone();
    let mut eval_in = eval.clone();
    for (l, &size) in sizes.iter().enumerate() {
        let layer_config = RbmTrainConfig {
            seed: config.seed.wrapping_add(l as u64),
            ..config.clone()
        };
        let mut failure = None;
        let trained = train_rbm_observed(&train_in, size, &layer_config, |stats, params| {
            if failure.is_some() {
                return;
            }
            let e = stats.epoch;
            log::info!(
                "rbm layer {} epoch {e}: reconstruction error {:.6}",
                l + 1,
                stats.reconstruction_error
            );
            if e % record_every.max(1) == 0 || e == config.epochs {
                match prop_up(params, &eval_in).and_then(|h| mean_hspm(&h)) {
                    Ok(h) => record(l + 1, e, h),
                    Err(err) => failure = Some(err),
                }
            }
        })
        .map_err(|e| e.in_stage(format!("pretrain layer {}", l + 1)))?;
        if let Some(err) = failure {
            return Err(err.in_stage(format!("pretrain layer {} metrics", l + 1)));
        }
        train_in = prop_up(&trained.params, &train_in)?;
        eval_in = prop_up(&trained.params, &eval_in)?;
        stack.push(trained.params);
    }
    Ok(stack)
}

fn supervised(
    mut net: Network,
    variant: Variant,
    data: &Splits,
    config: &FineTuneConfig,
    first_epoch: usize,
    history: &mut Vec<HspmPoint>,
) -> Result<(Network, Vec<EpochReport>)> {
    let mut failure = None;
    let reports = fine_tune_observed(&mut net, &data.train, &data.test, config, |r, n| {
        log::info!(
            "{} epoch {}: train loss {:.6}, test error {:.4}",
            variant.display_name(),
            r.epoch,
            r.train_loss,
            r.test_error
        );
        if failure.is_none() {
            match layer_hspm(n, data.test.features()) {
                Ok(hs) => history.extend(hs.into_iter().enumerate().map(|(i, h)| HspmPoint {
                    layer: i + 1,
                    epoch: first_epoch + r.epoch,
                    hspm: h,
                })),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((net, reports))
}

fn layer_hspm(net: &Network, x: &Matrix) -> Result<Vec<f64>> {
    forward(net, x)?.hidden.iter().map(mean_hspm).collect()
}

fn history_at(net: &Network, x: &Matrix, epoch: usize) -> Result<Vec<HspmPoint>> {
    Ok(layer_hspm(net, x)?
        .into_iter()
        .enumerate()
        .map(|(i, hspm)| HspmPoint {
            layer: i + 1,
            epoch,
            hspm,
        })
        .collect())
}

fn run_dsigm(config: &ExperimentConfig, data: &Splits) -> Result<VariantResult> {
    let mut sizes = vec![data.train.dims()];
    sizes.extend(&config.layers);
    let net = init_random(&sizes, data.train.classes(), config.seed.wrapping_add(SEED_DSIGM_INIT))?;
    let mut history = history_at(&net, data.test.features(), 0)?;
    let before = if config.metrics.dsigm_before_training {
        Some(net.clone())
    } else {
        None
    };
    let train_config = FineTuneConfig {
        seed: config.seed.wrapping_add(SEED_DSIGM_TRAIN),
        ..config.dsigm.clone()
    };
    let (net, epochs) = supervised(net, Variant::Dsigm, data, &train_config, 0, &mut history)
        .map_err(|e| e.in_stage("dsigm training"))?;
    let analysed = before.as_ref().unwrap_or(&net);
    let analyses = analyze_layers(
        network_layers(analysed, data.test.features())?,
        &data.test,
        &config.metrics,
    )
    .map_err(|e| e.in_stage("dsigm metrics"))?;
    let test_error = evaluate(&net, data.test.features(), data.test.labels())?;
    Ok(VariantResult {
        variant: Variant::Dsigm,
        network: net,
        analyses,
        test_error,
        epochs,
        hspm_history: history,
    })
}

struct PretrainedResults {
    stack: Vec<RbmParams>,
    dprbms: Option<VariantResult>,
    dbns: Option<VariantResult>,
}

fn run_pretrained(config: &ExperimentConfig, data: &Splits) -> Result<PretrainedResults> {
    let pre_config = RbmTrainConfig {
        seed: config.seed.wrapping_add(SEED_PRETRAIN),
        ..config.pretrain.clone()
    };
    let mut pre_history = Vec::new();
    let stack = pretrain_tracked(
        data.train.features(),
        data.test.features(),
        &config.layers,
        &pre_config,
        1,
        |layer, epoch, hspm| pre_history.push(HspmPoint { layer, epoch, hspm }),
    )?;
    let net = init_from_stack(&stack, data.train.classes(), config.seed.wrapping_add(SEED_HEAD))?;

    let dprbms = if config.has(Variant::DpRbms) {
        let analyses = analyze_layers(
            network_layers(&net, data.test.features())?,
            &data.test,
            &config.metrics,
        )
        .map_err(|e| e.in_stage("dprbms metrics"))?;
        Some(VariantResult {
            variant: Variant::DpRbms,
            network: net.clone(),
            analyses,
            test_error: evaluate(&net, data.test.features(), data.test.labels())?,
            epochs: Vec::new(),
            hspm_history: pre_history,
        })
    } else {
        None
    };

    let dbns = if config.has(Variant::Dbns) {
        let ft_config = FineTuneConfig {
            seed: config.seed.wrapping_add(SEED_FINE_TUNE),
            ..config.finetune.clone()
        };
        let offset = config.pretrain.epochs;
        let mut history = history_at(&net, data.test.features(), offset)?;
        let (net, epochs) = supervised(net, Variant::Dbns, data, &ft_config, offset, &mut history)
            .map_err(|e| e.in_stage("dbns fine-tuning"))?;
        let analyses = analyze_layers(
            network_layers(&net, data.test.features())?,
            &data.test,
            &config.metrics,
        )
        .map_err(|e| e.in_stage("dbns metrics"))?;
        Some(VariantResult {
            variant: Variant::Dbns,
            test_error: evaluate(&net, data.test.features(), data.test.labels())?,
            network: net,
            analyses,
            epochs,
            hspm_history: history,
        })
    } else {
        None
    };
    Ok(PretrainedResults {
        stack,
        dprbms,
        dbns,
    })
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(vec![format!("cannot start {threads} threads: {e}")]))
}

/// Trains and measures the configured variants without writing files.
pub fn compute_experiment(config: &ExperimentConfig, data: &Splits) -> Result<ExperimentReport> {
    let classes = data.train.classes().max(data.test.classes());
    let k_range = config.k_range(classes)?;
    let dataset_hspm = mean_hspm(data.test.features()).map_err(|e| e.in_stage("data hspm"))?;

    let want_dsigm = config.has(Variant::Dsigm);
    let want_pretrained = config.has(Variant::DpRbms) || config.has(Variant::Dbns);
    let (dsigm, pretrained) = thread_pool(config.threads)?.install(|| {
        rayon::join(
            || want_dsigm.then(|| run_dsigm(config, data)).transpose(),
            || want_pretrained.then(|| run_pretrained(config, data)).transpose(),
        )
    });
    let dsigm = dsigm?;
    let pretrained = pretrained?;

    let mut variants = Vec::new();
    let mut rbm_stack = None;
    variants.extend(dsigm);
    if let Some(p) = pretrained {
        variants.extend(p.dprbms);
        variants.extend(p.dbns);
        rbm_stack = Some(p.stack);
    }
    variants.sort_by_key(|v| v.variant);
    Ok(ExperimentReport {
        classes,
        k_range: (*k_range.start(), *k_range.end()),
        dataset_hspm,
        variants,
        rbm_stack,
    })
}

/// Runs the experiment, writes every report into `config.output`, and
/// returns the report.
///
/// Files: `hspm.csv`, `aod.csv`, `errors.csv`, one `.slab` model per variant,
/// `rbm_stack.slab` when pretraining ran, and `split.csv` for CSV data.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = &config.output;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let data = load_data(config, Some(out)).map_err(|e| e.in_stage("data"))?;
    log::info!(
        "loaded {} training and {} evaluation samples",
        data.train.len(),
        data.test.len()
    );
    let report = compute_experiment(config, &data)?;
    write_reports(&report, out)?;
    Ok(report)
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl CsvOut {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let writer = csv::Writer::from_path(&path).map_err(|e| crate::data::csv_io(&path, e))?;
        let mut out = CsvOut { path, writer };
        out.row(header.iter().map(|s| s.to_string()))?;
        Ok(out)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer
            .write_record(&fields)
            .map_err(|e| crate::data::csv_io(&self.path, e))
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes `hspm.csv` (variant, layer, epoch, hspm) and `aod.csv`
/// (variant, layer, k, average_aod, tau) for a set of analysed layers.
fn write_metric_rows(
    hspm: &mut CsvOut,
    aod: &mut CsvOut,
    name: &str,
    analyses: &[LayerAnalysis],
    epoch: usize,
    ks: (usize, usize),
) -> Result<()> {
    for a in analyses {
        hspm.row([name.into(), a.layer.to_string(), epoch.to_string(), fmt(a.mean_hspm)])?;
        for k in ks.0..=ks.1 {
            aod.row([
                name.into(),
                a.layer.to_string(),
                k.to_string(),
                fmt(a.average_aod(k)?),
                fmt(a.calibration.tau),
            ])?;
        }
    }
    Ok(())
}

pub fn write_reports(report: &ExperimentReport, out: &Path) -> Result<()> {
    let mut hspm = CsvOut::create(out.join("hspm.csv"), &["variant", "layer", "epoch", "hspm"])?;
    let mut aod = CsvOut::create(
        out.join("aod.csv"),
        &["variant", "layer", "k", "average_aod", "tau"],
    )?;
    let mut errors = CsvOut::create(
        out.join("errors.csv"),
        &["variant", "epoch", "train_loss", "test_error"],
    )?;
    hspm.row(["dataset".into(), "0".into(), "0".into(), fmt(report.dataset_hspm)])?;
    for v in &report.variants {
        let name = v.variant.key();
        for p in &v.hspm_history {
            hspm.row([name.into(), p.layer.to_string(), p.epoch.to_string(), fmt(p.hspm)])?;
        }
        for a in &v.analyses {
            for k in report.k_range.0..=report.k_range.1 {
                aod.row([
                    name.into(),
                    a.layer.to_string(),
                    k.to_string(),
                    fmt(a.average_aod(k)?),
                    fmt(a.calibration.tau),
                ])?;
            }
        }
        for r in &v.epochs {
            errors.row([name.into(), r.epoch.to_string(), fmt(r.train_loss), fmt(r.test_error)])?;
        }
        save_model(
            out.join(format!("{name}.slab")),
            &Model::Network(v.network.clone()),
        )?;
    }
    if let Some(stack) = &report.rbm_stack {
        save_model(out.join("rbm_stack.slab"), &Model::RbmStack(stack.clone()))?;
    }
    hspm.finish()?;
    aod.finish()?;
    errors.finish()
}

/// Table with one row per variant plus the dataset, per-layer mean HSPM
/// columns, and the test error.
pub fn summary_table(report: &ExperimentReport) -> String {
    let layers = report
        .variants
        .iter()
        .map(|v| v.analyses.len())
        .max()
        .unwrap_or(0);
    let mut s = String::new();
    let _ = write!(s, "{:<10}", "");
    for l in 1..=layers {
        let _ = write!(s, "{:>10}", format!("layer {l}"));
    }
    let _ = writeln!(s, "{:>10}", "error");
    let mut rows: Vec<&VariantResult> = report.variants.iter().collect();
    rows.sort_by_key(|v| std::cmp::Reverse(v.variant));
    for v in rows {
        let _ = write!(s, "{:<10}", v.variant.display_name());
        for l in 0..layers {
            match v.analyses.get(l) {
                Some(a) => {
                    let _ = write!(s, "{:>10.4}", a.mean_hspm);
                }
                None => {
                    let _ = write!(s, "{:>10}", "-");
                }
            }
        }
        if v.epochs.is_empty() {
            let _ = writeln!(s, "{:>10}", "-");
        } else {
            let _ = writeln!(s, "{:>9.2}%", 100.0 * v.test_error);
        }
    }
    let _ = writeln!(s, "{:<10}{:>10.4}", "dataset", report.dataset_hspm);
    s
}

/// One recorded point of an HSPM sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub setting: String,
    pub hidden: usize,
    pub depth: usize,
    pub layer: usize,
    pub epoch: usize,
    pub hspm: f64,
}

/// Trains one RBM per `sweep.hidden_sizes` entry and one `width`-unit stack
/// per `sweep.depths` entry, recording evaluation-split layer HSPM over
/// epochs with the `[pretrain]` settings.
pub fn compute_sweep(config: &ExperimentConfig, data: &Splits) -> Result<Vec<SweepRow>> {
    let sweep = &config.sweep;
    if sweep.hidden_sizes.is_empty() && sweep.depths.is_empty() {
        return Err(Error::Config(vec![
            "sweep needs sweep.hidden_sizes or sweep.depths".into(),
        ]));
    }
    let pre_config = RbmTrainConfig {
        seed: config.seed.wrapping_add(SEED_PRETRAIN),
        ..config.pretrain.clone()
    };
    let settings = sweep
        .hidden_sizes
        .iter()
        .map(|&h| (format!("hidden={h}"), vec![h]))
        .chain(
            sweep
                .depths
                .iter()
                .map(|&d| (format!("depth={d}"), vec![sweep.width; d])),
        );
    let mut rows = Vec::new();
    for (setting, sizes) in settings {
        let hidden = sizes[0];
        let depth = sizes.len();
        pretrain_tracked(
            data.train.features(),
            data.test.features(),
            &sizes,
            &pre_config,
            sweep.record_every,
            |layer, epoch, hspm| {
                rows.push(SweepRow {
                    setting: setting.clone(),
                    hidden,
                    depth,
                    layer,
                    epoch,
                    hspm,
                })
            },
        )
        .map_err(|e| e.in_stage(format!("sweep {setting}")))?;
    }
    Ok(rows)
}

/// Runs [`compute_sweep`] and writes `sweep.csv`
/// (setting, hidden, depth, layer, epoch, hspm) into `config.output`.
pub fn run_hspm_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let out = &config.output;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let data = load_data(config, Some(out)).map_err(|e| e.in_stage("data"))?;
    let rows = thread_pool(config.threads)?.install(|| compute_sweep(config, &data))?;
    let mut csv = CsvOut::create(
        out.join("sweep.csv"),
        &["setting", "hidden", "depth", "layer", "epoch", "hspm"],
    )?;
    for r in &rows {
        csv.row([
            r.setting.clone(),
            r.hidden.to_string(),
            r.depth.to_string(),
            r.layer.to_string(),
            r.epoch.to_string(),
            fmt(r.hspm),
        ])?;
    }
    csv.finish()?;
    Ok(rows)
}

/// Analyses a saved model on `data` and writes `hspm.csv` and `aod.csv`
/// (variant column `model`) into `out`.
pub fn run_metrics(
    model: &Model,
    data: &Dataset,
    options: &MetricsOptions,
    out: &Path,
) -> Result<Vec<LayerAnalysis>> {
    let layers = match model {
        Model::Network(net) => network_layers(net, data.features())?,
        Model::RbmStack(stack) => stack_layers(stack, data.features())?,
    };
    let k_max = options.k_max.unwrap_or(data.classes());
    if options.k_min < 2 || k_max > data.classes() || options.k_min > k_max {
        return Err(Error::Config(vec![format!(
            "k range [{}, {k_max}] not within [2, {}]",
            options.k_min,
            data.classes()
        )]));
    }
    let analyses = analyze_layers(layers, data, options)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut hspm = CsvOut::create(out.join("hspm.csv"), &["variant", "layer", "epoch", "hspm"])?;
    let mut aod = CsvOut::create(
        out.join("aod.csv"),
        &["variant", "layer", "k", "average_aod", "tau"],
    )?;
    hspm.row(["dataset".into(), "0".into(), "0".into(), fmt(mean_hspm(data.features())?)])?;
    write_metric_rows(&mut hspm, &mut aod, "model", &analyses, 0, (options.k_min, k_max))?;
    hspm.finish()?;
    aod.finish()?;
    Ok(analyses)
}

/// Human-readable description of a saved model.
pub fn describe_model(model: &Model) -> String {
    let mut s = String::new();
    match model {
        Model::RbmStack(stack) => {
            let _ = writeln!(s, "kind: rbm-stack ({} layers)", stack.len());
            for (i, p) in stack.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "layer {}: {} visible -> {} hidden, |W| = {:.6}",
                    i + 1,
                    p.n_visible(),
                    p.n_hidden(),
                    p.weights.frobenius_norm()
                );
            }
        }
        Model::Network(net) => {
            let sizes: Vec<String> = net.layer_sizes().iter().map(|n| n.to_string()).collect();
            let _ = writeln!(s, "kind: network ({:?})", net.provenance);
            let _ = writeln!(s, "layers: {}", sizes.join("-"));
            for (i, l) in net.hidden.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "hidden {}: {} -> {}, |W| = {:.6}",
                    i + 1,
                    l.inputs(),
                    l.outputs(),
                    l.weights.frobenius_norm()
                );
            }
            let _ = writeln!(
                s,
                "head: {} -> {}, |W| = {:.6}",
                net.head.inputs(),
                net.head.outputs(),
                net.head.weights.frobenius_norm()
            );
        }
    }
    s
}
