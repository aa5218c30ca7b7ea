//! Binary model files.
//!
//! Layout (little-endian): magic `DFTMODEL`, `u32` version, `u32` name length
//! and UTF-8 attribute name, `u8` frozen flag, `u32` layer count, then per
//! layer `u32` input, `u32` output and `u8` activation code, followed by every
//! layer's weights (row-major) and bias as `f64`.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::model::{Activation, FeedForwardModel, Layer};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 8] = b"DFTMODEL";
pub const MODEL_VERSION: u32 = 1;

fn corrupt(e: std::io::Error) -> Error {
    Error::Corrupt(format!("truncated model file ({e})"))
}

impl<T: Scalar> FeedForwardModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.write_u32::<LE>(MODEL_VERSION).unwrap();
        out.write_u32::<LE>(self.attribute().len() as u32).unwrap();
        out.extend_from_slice(self.attribute().as_bytes());
        out.write_u8(self.is_frozen() as u8).unwrap();
        out.write_u32::<LE>(self.layers().len() as u32).unwrap();
        for l in self.layers() {
            out.write_u32::<LE>(l.input_dim() as u32).unwrap();
            out.write_u32::<LE>(l.output_dim() as u32).unwrap();
            out.write_u8(l.activation.code()).unwrap();
        }
        for l in self.layers() {
            for v in l.weights.as_slice().iter().chain(l.bias.as_slice()) {
                out.write_f64::<LE>(v.to_f64_lossy()).unwrap();
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(corrupt)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Corrupt("bad model magic".into()));
        }
        let version = r.read_u32::<LE>().map_err(corrupt)?;
        if version != MODEL_VERSION {
            return Err(Error::Version { found: version, expected: MODEL_VERSION });
        }
        let name_len = r.read_u32::<LE>().map_err(corrupt)? as usize;
        if name_len > bytes.len() {
            return Err(Error::Corrupt("attribute name length exceeds file".into()));
        }
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name).map_err(corrupt)?;
        let name = String::from_utf8(name).map_err(|_| Error::Corrupt("attribute name is not UTF-8".into()))?;
        let frozen = r.read_u8().map_err(corrupt)? != 0;
        let count = r.read_u32::<LE>().map_err(corrupt)? as usize;
        if count > bytes.len() {
            return Err(Error::Corrupt("layer count exceeds file".into()));
        }
        let mut shapes = Vec::with_capacity(count);
        for _ in 0..count {
            let input = r.read_u32::<LE>().map_err(corrupt)? as usize;
            let output = r.read_u32::<LE>().map_err(corrupt)? as usize;
            let act = r.read_u8().map_err(corrupt)?;
            let act = Activation::from_code(act).ok_or_else(|| Error::Corrupt(format!("unknown activation code {act}")))?;
            shapes.push((input, output, act));
        }
        let expected: usize = shapes.iter().map(|&(i, o, _)| (i * o + o) * 8).sum();
        let remaining = bytes.len() - r.position() as usize;
        if remaining != expected {
            return Err(Error::Corrupt(format!(
                "expected {expected} bytes of parameters, found {remaining}"
            )));
        }
        let mut read_tensor = |shape: Vec<usize>| -> Result<Tensor<T>> {
            let n = shape.iter().product();
            let mut buf = vec![0f64; n];
            r.read_f64_into::<LE>(&mut buf).map_err(corrupt)?;
            Tensor::from_f64(shape, &buf)
        };
        let mut layers = Vec::with_capacity(count);
        for (input, output, act) in shapes {
            let w = read_tensor(vec![output, input])?;
            let b = read_tensor(vec![output])?;
            layers.push(Layer::new(w, b, act)?);
        }
        let mut model = Self::from_layers(name, layers)?;
        model.set_frozen(frozen);
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
