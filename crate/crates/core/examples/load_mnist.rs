//! Load MNIST from IDX files.
//!
//! With `MNIST_DIR` set to a directory holding the four standard files, the
//! real data is loaded. Otherwise a two-image fixture is written to a
//! temporary directory and read back.

use std::path::{Path, PathBuf};

use rbm_sparsity::data::{load_idx_dataset, IdxImages, labels_to_bytes};
use rbm_sparsity::metrics::mean_hspm;
use rbm_sparsity::{Error, Result};

fn write_fixture(dir: &Path) -> Result<()> {
    let images = IdxImages {
        count: 2,
        rows: 2,
        cols: 2,
        pixels: vec![0, 255, 0, 0, 128, 128, 128, 128],
    };
    let labels = labels_to_bytes(&[3, 7]);
    for prefix in ["train", "t10k"] {
        let img = dir.join(format!("{prefix}-images-idx3-ubyte"));
        let lab = dir.join(format!("{prefix}-labels-idx1-ubyte"));
        std::fs::write(&img, images.to_bytes()).map_err(|e| io(&img, e))?;
        std::fs::write(&lab, &labels).map_err(|e| io(&lab, e))?;
    }
    Ok(())
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Domain(format!("{}: {e}", path.display()))
}

/// Returns the number of test images and their mean HSPM.
pub fn run() -> Result<(usize, f64)> {
    let _tmp;
    let dir: PathBuf = match std::env::var_os("MNIST_DIR") {
        Some(d) => d.into(),
        None => {
            let t = tempfile::tempdir().map_err(|e| io(Path::new("tempdir"), e))?;
            write_fixture(t.path())?;
            let p = t.path().to_path_buf();
            _tmp = t;
            p
        }
    };
    let test = load_idx_dataset(
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
        10,
    )?;
    let h = mean_hspm(test.features())?;
    println!(
        "{} test images of {} pixels, mean HSPM {h:.4}",
        test.len(),
        test.dims()
    );
    Ok((test.len(), h))
}

fn main() -> Result<()> {
    run().map(|_| ())
}
