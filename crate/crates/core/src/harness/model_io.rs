//! Binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "MLPINIT\0"
//! version    u32      FORMAT_VERSION
//! topology   u8       number of weight layers (1, 2 or 3)
//! per layer:
//!   rows     u32      output width
//!   cols     u32      input width
//!   weights  f64 × rows·cols, row-major
//!   bias     f64 × rows
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Layer, MlpModel, Topology};
use crate::numerics::Matrix;

pub const MAGIC: &[u8; 8] = b"MLPINIT\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_model(model: &MlpModel) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + model.param_count() * 8 + model.layers().len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(model.topology().depth() as u8);
    for layer in model.layers() {
        buf.extend_from_slice(&(layer.output_dim() as u32).to_le_bytes());
        buf.extend_from_slice(&(layer.input_dim() as u32).to_le_bytes());
        for v in layer.weights.as_slice().iter().chain(&layer.bias) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::format(
                None,
                format!("model file truncated reading {what} at byte {}", self.pos),
            )
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::format(None, "layer too large"))?, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<MlpModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(Error::format(None, "not a model file (bad magic bytes)"));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let depth = cur.take(1, "topology")?[0];
    let topology = Topology::from_depth(depth as usize)
        .map_err(|_| Error::format(None, format!("unknown topology code {depth}")))?;
    let mut layers = Vec::with_capacity(topology.depth());
    for k in 0..topology.depth() {
        let rows = cur.u32("layer rows")? as usize;
        let cols = cur.u32("layer cols")? as usize;
        let (want_rows, want_cols) = (topology.layer_dims()[k + 1], topology.layer_dims()[k]);
        if (rows, cols) != (want_rows, want_cols) {
            return Err(Error::format(
                None,
                format!("layer {k} is {rows}x{cols}, {topology} expects {want_rows}x{want_cols}"),
            ));
        }
        let weights = Matrix::new(rows, cols, cur.f64s(rows * cols, "weights")?)?;
        let bias = cur.f64s(rows, "bias")?;
        layers.push(Layer { weights, bias });
    }
    if cur.pos != bytes.len() {
        return Err(Error::format(
            None,
            format!("{} trailing bytes after the last layer", bytes.len() - cur.pos),
        ));
    }
    MlpModel::from_layers(topology, layers)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
