//! Save a pretrained network in the SLAB container, load it back, and print
//! its structure.

use rbm_sparsity::experiment::describe_model;
use rbm_sparsity::model_io::{decode_model, encode_model, load_model, save_model, Model};
use rbm_sparsity::network::init_from_stack;
use rbm_sparsity::rbm::RbmParams;
use rbm_sparsity::{Error, Result, Rng};

/// Returns whether the loaded model equals the saved one.
pub fn run() -> Result<bool> {
    let mut rng = Rng::new(4);
    let stack = vec![RbmParams::init(16, 8, &mut rng), RbmParams::init(8, 4, &mut rng)];
    let model = Model::Network(init_from_stack(&stack, 3, 9)?);

    let dir = tempfile::tempdir().map_err(|e| Error::Domain(e.to_string()))?;
    let path = dir.path().join("net.slab");
    save_model(&path, &model)?;
    let loaded = load_model(&path)?;
    print!("{}", describe_model(&loaded));

    let bytes = encode_model(&model);
    println!("{} bytes, header {:?}", bytes.len(), std::str::from_utf8(&bytes[..4]));
    let mut corrupt = bytes.clone();
    corrupt.truncate(bytes.len() - 5);
    if let Err(e) = decode_model(&corrupt) {
        println!("truncated file rejected: {e}");
    }
    Ok(loaded == model)
}

fn main() -> Result<()> {
    run().map(|_| ())
}
