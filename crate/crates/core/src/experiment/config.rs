//! Experiment configuration files (TOML).
//!
//! Every key is optional except `layers` and `data.source`; unknown keys are
//! rejected. Validation collects every problem before reporting. The full key
//! list with defaults is in the README.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_BUDGET, DEFAULT_CALIBRATION_SAMPLES};
use crate::network::{FineTuneConfig, Loss};
use crate::rbm::{MomentumSchedule, RbmTrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Random init, trained with backprop.
    Dsigm,
    /// Pretrained hidden layers, no supervised training.
    DpRbms,
    /// Pretrained, then fine-tuned.
    Dbns,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Dbns, Variant::DpRbms, Variant::Dsigm];

    pub fn key(self) -> &'static str {
        match self {
            Variant::Dsigm => "dsigm",
            Variant::DpRbms => "dprbms",
            Variant::Dbns => "dbns",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Dsigm => "Dsigm",
            Variant::DpRbms => "DpRBMs",
            Variant::Dbns => "DBNs",
        }
    }

    fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.key() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        classes: usize,
        train_per_class: usize,
        test_per_class: usize,
        noise: f64,
    },
    Mnist {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        train_limit: Option<usize>,
        test_limit: Option<usize>,
    },
    Csv {
        path: PathBuf,
        features: usize,
        test_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsOptions {
    pub k_min: usize,
    /// Defaults to the number of classes.
    pub k_max: Option<usize>,
    pub budget: f64,
    pub calibration_samples: usize,
    /// Analyse Dsigm at initialisation instead of after training.
    pub dsigm_before_training: bool,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            k_min: 2,
            k_max: None,
            budget: DEFAULT_BUDGET,
            calibration_samples: DEFAULT_CALIBRATION_SAMPLES,
            dsigm_before_training: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOptions {
    /// One single-layer RBM per entry.
    pub hidden_sizes: Vec<usize>,
    /// One stack of `width`-unit layers per entry.
    pub depths: Vec<usize>,
    pub width: usize,
    /// Record every `record_every` epochs (and always the last).
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: PathBuf,
    /// Hidden layer widths.
    pub layers: Vec<usize>,
    pub variants: Vec<Variant>,
    pub threads: usize,
    pub data: DataSource,
    pub pretrain: RbmTrainConfig,
    pub finetune: FineTuneConfig,
    /// Supervised training of the random-init network; epochs default to
    /// pretraining + fine-tuning epochs.
    pub dsigm: FineTuneConfig,
    pub metrics: MetricsOptions,
    pub sweep: SweepOptions,
}

impl ExperimentConfig {
    pub fn has(&self, v: Variant) -> bool {
        self.variants.contains(&v)
    }

    /// Classes known before loading data, if any.
    pub fn known_classes(&self) -> Option<usize> {
        match &self.data {
            DataSource::Synthetic { classes, .. } => Some(*classes),
            DataSource::Mnist { .. } => Some(10),
            DataSource::Csv { .. } => None,
        }
    }

    /// Inclusive `k` range for a dataset with `classes` classes.
    pub fn k_range(&self, classes: usize) -> Result<std::ops::RangeInclusive<usize>> {
        let k_max = self.metrics.k_max.unwrap_or(classes);
        if k_max > classes {
            return Err(Error::Config(vec![format!(
                "metrics.k_max = {k_max} exceeds the {classes} classes in the data"
            )]));
        }
        if self.metrics.k_min > k_max {
            return Err(Error::Config(vec![format!(
                "metrics.k_min = {} exceeds k_max = {k_max}",
                self.metrics.k_min
            )]));
        }
        Ok(self.metrics.k_min..=k_max)
    }
}

/// Walks one table, collecting type errors and remembering which keys were
/// consumed so leftovers can be reported as unknown.
struct Section<'a, 'e> {
    name: &'a str,
    table: Option<&'a Table>,
    used: Vec<&'static str>,
    errors: &'e mut Vec<String>,
}

impl<'a> Section<'a, '_> {
    fn key_path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn int(&mut self, key: &'static str, min: i64) -> Option<usize> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= min => Some(*i as usize),
            Value::Integer(i) => {
                let path = self.key_path(key);
                self.errors.push(format!("{path} = {i} is below {min}"));
                None
            }
            other => {
                let path = self.key_path(key);
                self.errors
                    .push(format!("{path} must be an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn float(&mut self, key: &'static str) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                let path = self.key_path(key);
                self.errors
                    .push(format!("{path} must be a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn positive(&mut self, key: &'static str) -> Option<f64> {
        let v = self.float(key)?;
        if !(v > 0.0 && v.is_finite()) {
            let path = self.key_path(key);
            self.errors.push(format!("{path} = {v} must be positive"));
            return None;
        }
        Some(v)
    }

    fn non_negative(&mut self, key: &'static str) -> Option<f64> {
        let v = self.float(key)?;
        if !(v >= 0.0 && v.is_finite()) {
            let path = self.key_path(key);
            self.errors.push(format!("{path} = {v} must be non-negative"));
            return None;
        }
        Some(v)
    }

    fn string(&mut self, key: &'static str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                let path = self.key_path(key);
                self.errors
                    .push(format!("{path} must be a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, key: &'static str) -> Option<bool> {
        match self.raw(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                let path = self.key_path(key);
                self.errors
                    .push(format!("{path} must be true or false, found {}", other.type_str()));
                None
            }
        }
    }

    fn int_list(&mut self, key: &'static str) -> Option<Vec<usize>> {
        let path = self.key_path(key);
        match self.raw(key)? {
            Value::Array(items) => {
                let mut out = Vec::new();
                for item in items {
                    match item {
                        Value::Integer(i) if *i >= 1 => out.push(*i as usize),
                        _ => {
                            self.errors
                                .push(format!("{path} entries must be positive integers"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            other => {
                self.errors
                    .push(format!("{path} must be a list, found {}", other.type_str()));
                None
            }
        }
    }

    fn string_list(&mut self, key: &'static str) -> Option<Vec<&'a str>> {
        let path = self.key_path(key);
        match self.raw(key)? {
            Value::Array(items) => {
                let strs: Option<Vec<&str>> = items.iter().map(Value::as_str).collect();
                if strs.is_none() {
                    self.errors.push(format!("{path} entries must be strings"));
                }
                strs
            }
            other => {
                self.errors
                    .push(format!("{path} must be a list, found {}", other.type_str()));
                None
            }
        }
    }

    fn sub(&mut self, key: &'static str) -> Option<&'a Table> {
        match self.raw(key)? {
            Value::Table(t) => Some(t),
            other => {
                let path = self.key_path(key);
                self.errors
                    .push(format!("[{path}] must be a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn finish(self) {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.used.contains(&key.as_str()) {
                    let path = self.key_path(key);
                    self.errors.push(format!("unknown key {path}"));
                }
            }
        }
    }
}

fn section<'a, 'e>(
    name: &'a str,
    table: Option<&'a Table>,
    errors: &'e mut Vec<String>,
) -> Section<'a, 'e> {
    Section {
        name,
        table,
        used: Vec::new(),
        errors,
    }
}

fn momentum(s: &mut Section<'_, '_>) -> MomentumSchedule {
    let d = MomentumSchedule::default();
    MomentumSchedule {
        initial: s.non_negative("momentum_initial").unwrap_or(d.initial),
        final_value: s.non_negative("momentum_final").unwrap_or(d.final_value),
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Parses and validates configuration text. Relative paths are resolved
/// against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("TOML syntax: {e}")]))?;
    let mut errors = Vec::new();

    let mut top = section("", Some(&root), &mut errors);
    let seed = top.int("seed", 0).unwrap_or(0) as u64;
    let output = top
        .string("output")
        .map(|s| resolve(base_dir, s))
        .unwrap_or_else(|| base_dir.join("out"));
    let layers = top.int_list("layers");
    let variant_names = top.string_list("variants");
    let threads = top.int("threads", 1).unwrap_or(1);
    let data_t = top.sub("data");
    let pre_t = top.sub("pretrain");
    let ft_t = top.sub("finetune");
    let ds_t = top.sub("dsigm");
    let met_t = top.sub("metrics");
    let sw_t = top.sub("sweep");
    let layers_missing = top.table.is_some_and(|t| !t.contains_key("layers"));
    top.finish();

    if layers_missing {
        errors.push("layers is required (hidden layer widths)".into());
    }
    let layers = layers.unwrap_or_default();
    if !layers_missing && layers.is_empty() {
        errors.push("layers must list at least one hidden layer".into());
    }

    let mut variants = Vec::new();
    match variant_names {
        Some(names) => {
            for n in names {
                match Variant::parse(n) {
                    Some(v) if !variants.contains(&v) => variants.push(v),
                    Some(_) => errors.push(format!("variant {n:?} listed twice")),
                    None => errors.push(format!(
                        "unknown variant {n:?} (expected dsigm, dprbms or dbns)"
                    )),
                }
            }
            if variants.is_empty() {
                errors.push("variants must name at least one variant".into());
            }
        }
        None => variants = Variant::ALL.to_vec(),
    }
    variants.sort();

    let data = parse_data(data_t, base_dir, &mut errors);

    let rbm_default = RbmTrainConfig::default();
    let mut s = section("pretrain", pre_t, &mut errors);
    let pretrain = RbmTrainConfig {
        learning_rate: s.positive("learning_rate").unwrap_or(rbm_default.learning_rate),
        momentum: momentum(&mut s),
        l2: s.non_negative("l2").unwrap_or(rbm_default.l2),
        batch_size: s.int("batch_size", 1).unwrap_or(rbm_default.batch_size),
        epochs: s.int("epochs", 0).unwrap_or(rbm_default.epochs),
        seed,
    };
    s.finish();

    let finetune = parse_finetune("finetune", ft_t, &FineTuneConfig::default(), &mut errors);
    let dsigm_default = FineTuneConfig {
        epochs: pretrain.epochs + finetune.epochs,
        ..finetune.clone()
    };
    let dsigm = parse_finetune("dsigm", ds_t, &dsigm_default, &mut errors);

    let md = MetricsOptions::default();
    let mut s = section("metrics", met_t, &mut errors);
    let k_min = s.int("k_min", i64::MIN).unwrap_or(md.k_min);
    let k_max = s.int("k_max", i64::MIN);
    let metrics = MetricsOptions {
        k_min,
        k_max,
        budget: s.positive("budget").unwrap_or(md.budget),
        calibration_samples: s.int("calibration_samples", 1).unwrap_or(md.calibration_samples),
        dsigm_before_training: s
            .boolean("dsigm_before_training")
            .unwrap_or(md.dsigm_before_training),
    };
    s.finish();
    if metrics.k_min < 2 {
        errors.push(format!("metrics.k_min = {} is below 2", metrics.k_min));
    }
    if let Some(k) = metrics.k_max {
        if k < 2 {
            errors.push(format!("metrics.k_max = {k} is below 2"));
        }
        if k < metrics.k_min {
            errors.push(format!("metrics.k_max = {k} is below k_min = {}", metrics.k_min));
        }
    }

    let mut s = section("sweep", sw_t, &mut errors);
    let sweep = SweepOptions {
        hidden_sizes: s.int_list("hidden_sizes").unwrap_or_default(),
        depths: s.int_list("depths").unwrap_or_default(),
        width: s.int("width", 1).unwrap_or_else(|| layers.first().copied().unwrap_or(1)),
        record_every: s.int("record_every", 1).unwrap_or(1),
    };
    s.finish();

    let config = data.map(|data| ExperimentConfig {
        seed,
        output,
        layers,
        variants,
        threads,
        data,
        pretrain,
        finetune,
        dsigm,
        metrics,
        sweep,
    });
    if let Some(c) = &config {
        if let (Some(m), Some(k_max)) = (c.known_classes(), c.metrics.k_max) {
            if k_max > m {
                errors.push(format!("metrics.k_max = {k_max} exceeds the {m} classes"));
            }
        }
        if let Some(m) = c.known_classes() {
            if c.metrics.k_min > m {
                errors.push(format!("metrics.k_min = {} exceeds the {m} classes", c.metrics.k_min));
            }
        }
    }

    match config {
        Some(c) if errors.is_empty() => Ok(c),
        _ => Err(Error::Config(errors)),
    }
}

fn parse_finetune(
    name: &'static str,
    table: Option<&Table>,
    defaults: &FineTuneConfig,
    errors: &mut Vec<String>,
) -> FineTuneConfig {
    let mut s = section(name, table, errors);
    let loss = match s.string("loss") {
        None => defaults.loss,
        Some("nll") => Loss::NegativeLogLikelihood,
        Some("squared") => Loss::Squared,
        Some(other) => {
            s.errors
                .push(format!("{name}.loss = {other:?} (expected \"nll\" or \"squared\")"));
            defaults.loss
        }
    };
    let cfg = FineTuneConfig {
        learning_rate: s.positive("learning_rate").unwrap_or(defaults.learning_rate),
        momentum: MomentumSchedule {
            initial: s.non_negative("momentum_initial").unwrap_or(defaults.momentum.initial),
            final_value: s
                .non_negative("momentum_final")
                .unwrap_or(defaults.momentum.final_value),
        },
        l2: s.non_negative("l2").unwrap_or(defaults.l2),
        batch_size: s.int("batch_size", 1).unwrap_or(defaults.batch_size),
        epochs: s.int("epochs", 0).unwrap_or(defaults.epochs),
        seed: defaults.seed,
        loss,
    };
    s.finish();
    cfg
}

fn parse_data(table: Option<&Table>, base: &Path, errors: &mut Vec<String>) -> Option<DataSource> {
    let mut s = section("data", table, errors);
    if table.is_none() {
        s.errors.push("[data] section is required".into());
        return None;
    }
    let source = match s.string("source") {
        Some(src) => src,
        None => {
            if !table.is_some_and(|t| t.contains_key("source")) {
                s.errors.push("data.source is required".into());
            }
            s.finish();
            return None;
        }
    };
    let out = match source {
        "synthetic" => {
            let classes = s.int("classes", 2).unwrap_or(4);
            let train = s.int("train_per_class", 1).unwrap_or(200);
            let test = s.int("test_per_class", 1).unwrap_or(50);
            let noise = s.non_negative("noise").unwrap_or(0.05);
            if noise > 1.0 {
                s.errors.push(format!("data.noise = {noise} exceeds 1"));
            }
            Some(DataSource::Synthetic {
                classes,
                train_per_class: train,
                test_per_class: test,
                noise,
            })
        }
        "mnist" => {
            let path = |s: &mut Section<'_, '_>, key: &'static str| {
                let p = s.string(key).map(|p| resolve(base, p));
                if p.is_none() && !table.is_some_and(|t| t.contains_key(key)) {
                    s.errors.push(format!("data.{key} is required for MNIST"));
                }
                p
            };
            let train_images = path(&mut s, "train_images");
            let train_labels = path(&mut s, "train_labels");
            let test_images = path(&mut s, "test_images");
            let test_labels = path(&mut s, "test_labels");
            let train_limit = s.int("train_limit", 1);
            let test_limit = s.int("test_limit", 1);
            match (train_images, train_labels, test_images, test_labels) {
                (Some(a), Some(b), Some(c), Some(d)) => Some(DataSource::Mnist {
                    train_images: a,
                    train_labels: b,
                    test_images: c,
                    test_labels: d,
                    train_limit,
                    test_limit,
                }),
                _ => None,
            }
        }
        "csv" => {
            let path = s.string("path").map(|p| resolve(base, p));
            if path.is_none() && !table.is_some_and(|t| t.contains_key("path")) {
                s.errors.push("data.path is required for CSV data".into());
            }
            let features = s.int("features", 1).unwrap_or(16);
            let test_fraction = s.float("test_fraction").unwrap_or(0.2);
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                s.errors
                    .push(format!("data.test_fraction = {test_fraction} must be in (0, 1)"));
            }
            path.map(|path| DataSource::Csv {
                path,
                features,
                test_fraction,
            })
        }
        other => {
            s.errors.push(format!(
                "data.source = {other:?} (expected \"synthetic\", \"mnist\" or \"csv\")"
            ));
            None
        }
    };
    s.finish();
    out
}

/// Reads and validates a config file, reporting every problem at once.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(vec![format!("cannot read {}: {e}", path.display())])
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, Path::new("/tmp/base"))
    }

    fn errors(text: &str) -> Vec<String> {
        match parse(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    const MINIMAL: &str = "layers = [20]\n[data]\nsource = \"synthetic\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.pretrain.learning_rate, 0.1);
        assert_eq!(c.pretrain.batch_size, 100);
        assert_eq!(c.pretrain.l2, 1e-4);
        assert_eq!(c.finetune.learning_rate, 0.1);
        assert_eq!(c.finetune.loss, Loss::NegativeLogLikelihood);
        assert_eq!(c.metrics.budget, 0.05);
        assert_eq!(c.metrics.k_min, 2);
        assert_eq!(c.variants, vec![Variant::Dsigm, Variant::DpRbms, Variant::Dbns]);
        assert_eq!(c.dsigm.epochs, c.pretrain.epochs + c.finetune.epochs);
        assert_eq!(c.output, PathBuf::from("/tmp/base/out"));
        assert_eq!(c.pretrain.momentum, MomentumSchedule::default());
    }

    #[test]
    fn k_below_two() {
        let e = errors(&format!("{MINIMAL}[metrics]\nk_min = 1\n"));
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("below 2"), "{e:?}");
    }

    #[test]
    fn every_violation_is_reported() {
        let e = errors(&format!(
            "{MINIMAL}[pretrain]\nlearning_rate = -1.0\nbatch_size = 0\n"
        ));
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = errors(&format!("lerning_rate = 0.1\n{MINIMAL}[finetune]\nepoch = 3\n"));
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e.iter().any(|m| m.contains("unknown key lerning_rate")));
        assert!(e.iter().any(|m| m.contains("unknown key finetune.epoch")));
    }

    #[test]
    fn structural_requirements() {
        let e = errors("[data]\nsource = \"mnist\"\n");
        assert!(e.iter().any(|m| m.contains("layers is required")));
        assert_eq!(e.iter().filter(|m| m.contains("required for MNIST")).count(), 4);
        let e = errors("layers = [3]\nvariants = [\"dsigm\", \"nope\"]\n");
        assert!(e.iter().any(|m| m.contains("nope")));
        assert!(e.iter().any(|m| m.contains("[data]")));
        assert!(!errors("layers = [3\n")[0].is_empty());
    }

    #[test]
    fn k_max_checked_against_known_classes() {
        let e = errors(&format!("{MINIMAL}[metrics]\nk_max = 7\n"));
        assert!(e[0].contains("exceeds"), "{e:?}");
        let c = parse(&format!("{MINIMAL}[metrics]\nk_max = 3\n")).unwrap();
        assert_eq!(c.k_range(4).unwrap(), 2..=3);
        assert!(c.k_range(2).is_err());
    }
}
