//! Datasets, loaders and seeded minibatching.

mod csv;
mod idx;
mod synth;

use std::path::Path;

pub use self::csv::{load_csv_features, min_max_normalize, parse_csv_features};
pub use self::idx::{
    labels_to_bytes, load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels, IdxImages,
    IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use self::synth::{class_bars, synth_bars, BAR_GRID};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Feature rows in `[0, 1]` with class labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Domain(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if let Some((i, v)) = features
            .data()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::Domain(format!(
                "feature {v} at flat index {i} outside [0, 1]"
            )));
        }
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(Error::Domain(format!(
                "label {l} at sample {i} outside [0, {classes})"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            classes,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.cols()
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// The first `n` samples.
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            features: self.features.head(n),
            labels: self.labels[..n].to_vec(),
            classes: self.classes,
        }
    }
}

/// Loads an IDX image file and its label file into a [`Dataset`] with
/// `classes` classes.
pub fn load_idx_dataset(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    classes: usize,
) -> Result<Dataset> {
    let features = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    Dataset::new(features, labels, classes)
}

fn mix_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The sample order for one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub seed: u64,
    pub epoch: u64,
    pub batch_size: usize,
    pub permutation: Vec<usize>,
}

impl BatchPlan {
    /// Shuffles `0..n` with a generator seeded by `(seed, epoch)`.
    pub fn new(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Self {
        let mut permutation: Vec<usize> = (0..n).collect();
        Rng::new(mix_seed(seed, epoch)).shuffle(&mut permutation);
        BatchPlan {
            seed,
            epoch,
            batch_size: batch_size.max(1),
            permutation,
        }
    }

    /// Index slices of each batch; the last one may be short.
    pub fn batches(&self) -> impl Iterator<Item = &[usize]> {
        self.permutation.chunks(self.batch_size)
    }
}

/// Shuffled `(features, labels)` batches for one epoch. The final short batch
/// is kept.
pub fn make_batches(
    dataset: &Dataset,
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Vec<(Matrix, Vec<usize>)> {
    let plan = BatchPlan::new(dataset.len(), batch_size, seed, epoch);
    plan.batches()
        .map(|idx| {
            (
                dataset.features.select_rows(idx),
                idx.iter().map(|&i| dataset.labels[i]).collect(),
            )
        })
        .collect()
}

/// Which side of a train/test split a sample landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Seeded random split; `round(test_fraction · n)` samples go to the test side.
/// Returns the two datasets and the per-sample assignment.
pub fn split_dataset(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Vec<Split>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::Domain(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(mix_seed(seed, u64::MAX)).shuffle(&mut order);
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut assignment = vec![Split::Train; n];
    for &i in &order[..n_test] {
        assignment[i] = Split::Test;
    }
    let pick = |side: Split| -> Vec<usize> {
        (0..n).filter(|&i| assignment[i] == side).collect()
    };
    Ok((
        dataset.select(&pick(Split::Train)),
        dataset.select(&pick(Split::Test)),
        assignment,
    ))
}

/// Writes `index,split` rows for a split assignment.
pub fn write_split_manifest(path: impl AsRef<Path>, assignment: &[Split]) -> Result<()> {
    let path = path.as_ref();
    let mut w = ::csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["index", "split"]).map_err(|e| csv_io(path, e))?;
    for (i, s) in assignment.iter().enumerate() {
        w.write_record([i.to_string().as_str(), s.as_str()])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_io(path: &Path, e: ::csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}
