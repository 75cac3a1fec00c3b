//! Big-endian IDX files as distributed with MNIST.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw image tensor: `count` images of `rows × cols` unsigned bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    /// Flattens to `count × (rows·cols)` and scales bytes by 1/255.
    pub fn to_matrix(&self) -> Matrix {
        let data = self.pixels.iter().map(|&p| p as f64 / 255.0).collect();
        Matrix::new(self.count, self.rows * self.cols, data).expect("sizes checked at parse time")
    }

    /// Inverse of [`IdxImages::to_matrix`], rounding to the nearest byte.
    pub fn from_matrix(m: &Matrix, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != m.cols() {
            return Err(Error::Shape {
                op: "IdxImages::from_matrix",
                left: m.shape(),
                right: (rows, cols),
            });
        }
        let pixels = m
            .data()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        Ok(IdxImages {
            count: m.rows(),
            rows,
            cols,
            pixels,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for v in [IDX_IMAGES_MAGIC, self.count as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u32(&mut self, what: &str) -> Result<u32> {
        let chunk = self.take(4, what)?;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Idx {
                offset: self.bytes.len(),
                reason: format!(
                    "truncated {what}: needed {n} bytes at offset {}, file ends at {}",
                    self.pos,
                    self.bytes.len()
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Idx {
                offset: self.pos,
                reason: format!("{} trailing bytes", self.bytes.len() - self.pos),
            });
        }
        Ok(())
    }
}

fn check_magic(cur: &mut Cursor<'_>, expected: u32) -> Result<()> {
    let magic = cur.u32("magic number")?;
    if magic != expected {
        return Err(Error::Idx {
            offset: 0,
            reason: format!("magic 0x{magic:08x}, expected 0x{expected:08x}"),
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let mut cur = Cursor { bytes, pos: 0 };
    check_magic(&mut cur, IDX_IMAGES_MAGIC)?;
    let count = cur.u32("image count")? as usize;
    let rows = cur.u32("row count")? as usize;
    let cols = cur.u32("column count")? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::Idx {
            offset: 8,
            reason: format!("degenerate image size {rows}x{cols}"),
        });
    }
    let len = count
        .checked_mul(rows * cols)
        .ok_or_else(|| Error::Idx {
            offset: 4,
            reason: "image dimensions overflow".into(),
        })?;
    let pixels = cur.take(len, "pixel data")?.to_vec();
    cur.finish()?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut cur = Cursor { bytes, pos: 0 };
    check_magic(&mut cur, IDX_LABELS_MAGIC)?;
    let count = cur.u32("label count")? as usize;
    let labels = cur.take(count, "label data")?.to_vec();
    cur.finish()?;
    Ok(labels)
}

/// Serialises labels as an IDX label file.
pub fn labels_to_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads an IDX image file as an `n × (rows·cols)` matrix in `[0, 1]`.
pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Matrix> {
    Ok(parse_idx_images(&read(path.as_ref())?)?.to_matrix())
}

/// Reads an IDX label file. Values are not range-checked here; see
/// [`super::Dataset::new`].
pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    Ok(parse_idx_labels(&read(path.as_ref())?)?
        .into_iter()
        .map(usize::from)
        .collect())
}
