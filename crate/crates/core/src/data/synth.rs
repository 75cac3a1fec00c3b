//! Synthetic "bars" images for desk-scale experiments.
//!
//! Images are `8 × 8`. There are 16 bars: rows `0..8` and columns `8..16`.
//! Bar 0 (the top row) is lit in every class; each class additionally owns a
//! distinct set of three other bars, so classes overlap both through the
//! common bar and wherever two classes' bars cross.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Side length of the square image.
pub const BAR_GRID: usize = 8;

const SHARED_BAR: usize = 0;
const BARS_PER_CLASS: usize = 3;

fn bar_pixels(bar: usize) -> impl Iterator<Item = usize> {
    (0..BAR_GRID).map(move |t| {
        if bar < BAR_GRID {
            bar * BAR_GRID + t
        } else {
            t * BAR_GRID + (bar - BAR_GRID)
        }
    })
}

/// Deterministic, distinct bar sets per class (the shared bar first).
pub fn class_bars(classes: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let pool: Vec<usize> = (1..2 * BAR_GRID).collect();
    let mut subsets = Vec::new();
    for a in 0..pool.len() {
        for b in a + 1..pool.len() {
            for c in b + 1..pool.len() {
                subsets.push([pool[a], pool[b], pool[c]]);
            }
        }
    }
    if classes < 2 || classes > subsets.len() {
        return Err(Error::Domain(format!(
            "bars data supports 2..={} classes, got {classes}",
            subsets.len()
        )));
    }
    Rng::new(seed).shuffle(&mut subsets);
    Ok(subsets[..classes]
        .iter()
        .map(|s| {
            let mut bars = vec![SHARED_BAR];
            bars.extend_from_slice(s);
            debug_assert_eq!(bars.len(), BARS_PER_CLASS + 1);
            bars
        })
        .collect())
}

/// `n_per_class · classes` bar images with every pixel flipped independently
/// with probability `noise`. Samples cycle through the classes in order.
pub fn synth_bars(n_per_class: usize, classes: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Domain(format!("noise {noise} outside [0, 1]")));
    }
    let bars = class_bars(classes, seed)?;
    let dims = BAR_GRID * BAR_GRID;
    let templates: Vec<Vec<f64>> = bars
        .iter()
        .map(|set| {
            let mut img = vec![0.0; dims];
            for &bar in set {
                for p in bar_pixels(bar) {
                    img[p] = 1.0;
                }
            }
            img
        })
        .collect();

    let mut rng = Rng::new(seed.wrapping_add(1));
    let n = n_per_class * classes;
    let mut data = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        for &p in &templates[class] {
            let flip = noise > 0.0 && rng.uniform() < noise;
            data.push(if flip { 1.0 - p } else { p });
        }
        labels.push(class);
    }
    Dataset::new(Matrix::new(n, dims, data)?, labels, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_classes_are_constant() {
        let d = synth_bars(5, 4, 0.0, 1).unwrap();
        for i in 0..d.len() {
            let first = d.labels()[i];
            assert_eq!(d.features().row(i), d.features().row(first));
        }
    }

    #[test]
    fn classes_share_raw_features() {
        let d = synth_bars(1, 6, 0.0, 2).unwrap();
        for a in 0..6 {
            for b in a + 1..6 {
                let shared = d
                    .features()
                    .row(a)
                    .iter()
                    .zip(d.features().row(b))
                    .filter(|(x, y)| **x == 1.0 && **y == 1.0)
                    .count();
                assert!(shared >= BAR_GRID);
                assert_ne!(d.features().row(a), d.features().row(b));
            }
        }
    }

    #[test]
    fn balanced_labels() {
        let d = synth_bars(7, 5, 0.1, 3).unwrap();
        for c in 0..5 {
            assert_eq!(d.labels().iter().filter(|&&l| l == c).count(), 7);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(synth_bars(3, 1, 0.0, 0).is_err());
        assert!(synth_bars(3, 1000, 0.0, 0).is_err());
        assert!(synth_bars(3, 2, 1.5, 0).is_err());
    }
}
