//! Load precomputed feature vectors from CSV (features then an integer
//! label per row), min-max normalised per column, and split them.

use rbm_sparsity::data::{parse_csv_features, split_dataset};
use rbm_sparsity::Result;

const FEATURES: &str = "\
f1,f2,f3,label
0.5,10,-3,0
1.5,20,-1,1
1.0,15,-2,1
2.5,30,0,2
0.5,25,-3,0
";

/// Returns the normalised feature matrix's column minima and maxima.
pub fn run() -> Result<(Vec<f64>, Vec<f64>)> {
    let data = parse_csv_features(FEATURES.as_bytes(), 3)?;
    println!("{} samples, {} classes", data.len(), data.classes());
    for row in data.features().row_iter() {
        println!("{row:?}");
    }
    let (train, test, assignment) = split_dataset(&data, 0.4, 9)?;
    let sides: Vec<&str> = assignment.iter().map(|s| s.as_str()).collect();
    println!("split: {sides:?} ({} train, {} test)", train.len(), test.len());

    let f = data.features();
    let col = |c: usize| (0..f.rows()).map(move |r| f.get(r, c));
    let mins = (0..f.cols()).map(|c| col(c).fold(f64::INFINITY, f64::min)).collect();
    let maxs = (0..f.cols()).map(|c| col(c).fold(f64::NEG_INFINITY, f64::max)).collect();
    Ok((mins, maxs))
}

fn main() -> Result<()> {
    run().map(|_| ())
}
