//! The `SLAB` binary container for RBM stacks and networks.
//!
//! ```text
//! "SLAB"                      4 bytes
//! version                     u32 LE (currently 1)
//! payload kind                u32 LE (1 = RBM stack, 2 = network)
//! provenance                  u32 LE, networks only (0 = random, 1 = pretrained)
//! tensor count                u32 LE
//! per tensor:
//!   rank                      u32 LE
//!   dims                      rank × u32 LE
//!   values                    product(dims) × f64 LE, row-major
//! ```
//!
//! An RBM stack stores `W, b, c` per layer. A network stores `W, b, c` per
//! hidden layer (`c` being the decoder bias) followed by the head's `W, b`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{Layer, Network, Provenance};
use crate::rbm::RbmParams;

pub const MAGIC: &[u8; 4] = b"SLAB";
pub const FORMAT_VERSION: u32 = 1;

const KIND_RBM_STACK: u32 = 1;
const KIND_NETWORK: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    RbmStack(Vec<RbmParams>),
    Network(Network),
}

impl Model {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::RbmStack(_) => "rbm-stack",
            Model::Network(_) => "network",
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn tensor(&mut self, dims: &[usize], values: &[f64]) {
        self.u32(dims.len() as u32);
        for &d in dims {
            self.u32(d as u32);
        }
        for v in values {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn matrix(&mut self, m: &Matrix) {
        self.tensor(&[m.rows(), m.cols()], m.data());
    }

    fn vector(&mut self, v: &[f64]) {
        self.tensor(&[v.len()], v);
    }
}

pub fn encode_model(model: &Model) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    match model {
        Model::RbmStack(stack) => {
            w.u32(KIND_RBM_STACK);
            w.u32((stack.len() * 3) as u32);
            for p in stack {
                w.matrix(&p.weights);
                w.vector(&p.hidden_bias);
                w.vector(&p.visible_bias);
            }
        }
        Model::Network(net) => {
            w.u32(KIND_NETWORK);
            w.u32(match net.provenance {
                Provenance::Random => 0,
                Provenance::Pretrained => 1,
            });
            w.u32((net.hidden.len() * 3 + 2) as u32);
            for (layer, c) in net.hidden.iter().zip(&net.decoder_bias) {
                w.matrix(&layer.weights);
                w.vector(&layer.bias);
                w.vector(c);
            }
            w.matrix(&net.head.weights);
            w.vector(&net.head.bias);
        }
    }
    w.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Model {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(format!("truncated: needed {n} more bytes")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn tensor(&mut self, rank: u32) -> Result<(Vec<usize>, Vec<f64>)> {
        let at = self.pos;
        let r = self.u32()?;
        if r != rank {
            self.pos = at;
            return Err(self.err(format!("expected a rank-{rank} tensor, found rank {r}")));
        }
        let dims = (0..r)
            .map(|_| self.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| self.err("tensor size overflows"))?;
        let raw = self.take(count.checked_mul(8).ok_or_else(|| self.err("tensor size overflows"))?)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok((dims, values))
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let (dims, values) = self.tensor(2)?;
        Matrix::new(dims[0], dims[1], values)
    }

    fn vector(&mut self) -> Result<Vec<f64>> {
        Ok(self.tensor(1)?.1)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Model {
            offset: 0,
            reason: "missing SLAB magic".into(),
        });
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Model {
            offset: 4,
            reason: format!("unsupported format version {version}"),
        });
    }
    let kind = r.u32()?;
    let model = match kind {
        KIND_RBM_STACK => {
            let count = r.u32()? as usize;
            if count == 0 || !count.is_multiple_of(3) {
                return Err(r.err(format!("an RBM stack needs 3 tensors per layer, got {count}")));
            }
            let mut stack = Vec::with_capacity(count / 3);
            for _ in 0..count / 3 {
                let w = r.matrix()?;
                let b = r.vector()?;
                let c = r.vector()?;
                stack.push(RbmParams::new(w, b, c).map_err(|e| r.err(e.to_string()))?);
            }
            Model::RbmStack(stack)
        }
        KIND_NETWORK => {
            let provenance = match r.u32()? {
                0 => Provenance::Random,
                1 => Provenance::Pretrained,
                other => return Err(r.err(format!("unknown provenance {other}"))),
            };
            let count = r.u32()? as usize;
            if count < 2 || !(count - 2).is_multiple_of(3) {
                return Err(r.err(format!("a network needs 3 tensors per layer plus 2, got {count}")));
            }
            let mut hidden = Vec::new();
            let mut decoder_bias = Vec::new();
            for _ in 0..(count - 2) / 3 {
                let weights = r.matrix()?;
                let bias = r.vector()?;
                hidden.push(Layer { weights, bias });
                decoder_bias.push(r.vector()?);
            }
            let head = Layer {
                weights: r.matrix()?,
                bias: r.vector()?,
            };
            Model::Network(
                Network::new(hidden, decoder_bias, head, provenance)
                    .map_err(|e| r.err(e.to_string()))?,
            )
        }
        other => {
            return Err(Error::Model {
                offset: 8,
                reason: format!("unknown payload kind {other}"),
            })
        }
    };
    if r.pos != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(model)
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    decode_model(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
