//! Restricted Boltzmann machine pretraining and hidden-activation sparsity
//! analysis for sigmoid networks.
//!
//! The crate trains binary RBMs with CD-1, stacks them greedily into deep
//! sigmoid classifiers, fine-tunes with backprop, and measures how sparse and
//! how class-overlapping each hidden layer's activations are:
//!
//! * [`matrix`], [`rng`]: dense `f64` kernels and a seeded, portable generator.
//! * [`rbm`]: energy, conditionals, CD-1, greedy stacking, and exact
//!   likelihood by enumeration for tiny models.
//! * [`network`]: random or pretrained initialisation, forward pass, backprop,
//!   SGD fine-tuning, evaluation.
//! * [`metrics`]: Hoyer sparseness, threshold calibration, class activation
//!   vectors, activation overlap.
//! * [`data`]: IDX and CSV loaders, synthetic bars, seeded batching and splits.
//! * [`model_io`]: the `SLAB` model container.
//! * [`experiment`]: config-driven runs that write CSV reports.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod data;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod model_io;
pub mod network;
pub mod rbm;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rng::Rng;
