//! Feature tables: `n_features` numeric columns followed by an integer label.

use std::io::Read;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column min–max scaling into `[0, 1]`; constant columns map to 0.
pub fn min_max_normalize(m: &Matrix) -> Matrix {
    let mut lo = vec![f64::INFINITY; m.cols()];
    let mut hi = vec![f64::NEG_INFINITY; m.cols()];
    for row in m.row_iter() {
        for (c, &v) in row.iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let mut out = m.clone();
    let cols = m.cols();
    for (k, v) in out.data_mut().iter_mut().enumerate() {
        let c = k % cols;
        let range = hi[c] - lo[c];
        *v = if range > 0.0 { (*v - lo[c]) / range } else { 0.0 };
    }
    out
}

fn parse_label(cell: &str, line: usize) -> Result<usize> {
    let v: f64 = cell.parse().map_err(|_| Error::Csv {
        line,
        reason: format!("label {cell:?} is not a number"),
    })?;
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::Csv {
            line,
            reason: format!("label {cell:?} is not a non-negative integer"),
        });
    }
    Ok(v as usize)
}

/// Parses a feature table from any reader. A first row containing a
/// non-numeric cell is treated as a header.
pub fn parse_csv_features(reader: impl Read, n_features: usize) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if i == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != n_features + 1 {
            return Err(Error::Csv {
                line,
                reason: format!(
                    "expected {} columns ({n_features} features + label), found {}",
                    n_features + 1,
                    record.len()
                ),
            });
        }
        for (c, cell) in record.iter().take(n_features).enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                line,
                reason: format!("column {} value {cell:?} is not numeric", c + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    reason: format!("column {} value {cell:?} is not finite", c + 1),
                });
            }
            values.push(v);
        }
        labels.push(parse_label(&record[n_features], line)?);
    }
    if labels.is_empty() {
        return Err(Error::Csv {
            line: 0,
            reason: "no data rows".into(),
        });
    }
    let raw = Matrix::new(labels.len(), n_features, values)?;
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(min_max_normalize(&raw), labels, classes)
}

/// Loads a feature table from disk, min–max normalising every column.
pub fn load_csv_features(path: impl AsRef<Path>, n_features: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_features(std::io::BufReader::new(file), n_features)
}
