use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{dim_err, Error, Result};
use crate::math::{arctanh_clamped, Tensor};
use crate::scalar::Scalar;

pub const PERTURBATION_MAGIC: &[u8; 8] = b"DFTNOISE";
pub const PERTURBATION_VERSION: u32 = 1;
pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

/// How the universal noise is combined with a sample before squashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMode {
    /// `Z = ½(tanh(X + N) + 1)`.
    #[default]
    Literal,
    /// `Z = ½(tanh(artanh(2X − 1) + N) + 1)`, the identity at `N = 0`.
    Preimage,
}

impl TransformMode {
    fn code(self) -> u8 {
        match self {
            TransformMode::Literal => 0,
            TransformMode::Preimage => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(TransformMode::Literal),
            1 => Some(TransformMode::Preimage),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformMode::Literal => "literal",
            TransformMode::Preimage => "preimage",
        }
    }
}

impl std::str::FromStr for TransformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(TransformMode::Literal),
            "preimage" => Ok(TransformMode::Preimage),
            other => Err(Error::Config(format!("unknown transform mode '{other}'"))),
        }
    }
}

/// One additive noise vector shared by every sample of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub noise: Tensor<T>,
    pub mode: TransformMode,
    pub clamp_eps: T,
}

impl<T: Scalar> Perturbation<T> {
    /// All-zero noise of dimension `dim`.
    pub fn zeros(dim: usize, mode: TransformMode) -> Self {
        Self { noise: Tensor::zeros(&[dim]), mode, clamp_eps: T::of(DEFAULT_CLAMP_EPS) }
    }

    pub fn new(noise: Vec<T>, mode: TransformMode, clamp_eps: T) -> Result<Self> {
        if !(clamp_eps > T::zero() && clamp_eps < T::one()) {
            return Err(Error::Config(format!("clamp eps {clamp_eps} must lie in (0,1)")));
        }
        if noise.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("perturbation entries must be finite".into()));
        }
        Ok(Self { noise: Tensor::vector(noise), mode, clamp_eps })
    }

    pub fn dim(&self) -> usize {
        self.noise.len()
    }

    /// Pre-squash value of a feature: `x` itself or its clamped preimage.
    #[inline]
    pub(crate) fn base(&self, x: T) -> T {
        match self.mode {
            TransformMode::Literal => x,
            TransformMode::Preimage => arctanh_clamped(T::of(2.0) * x - T::one(), self.clamp_eps),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(25 + 8 * self.dim());
        out.extend_from_slice(PERTURBATION_MAGIC);
        out.write_u32::<LE>(PERTURBATION_VERSION).unwrap();
        out.write_u8(self.mode.code()).unwrap();
        out.write_f64::<LE>(self.clamp_eps.to_f64_lossy()).unwrap();
        out.write_u32::<LE>(self.dim() as u32).unwrap();
        for v in self.noise.as_slice() {
            out.write_f64::<LE>(v.to_f64_lossy()).unwrap();
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let trunc = |_| Error::Corrupt("truncated perturbation file".into());
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(trunc)?;
        if &magic != PERTURBATION_MAGIC {
            return Err(Error::Corrupt("bad perturbation magic".into()));
        }
        let version = r.read_u32::<LE>().map_err(trunc)?;
        if version != PERTURBATION_VERSION {
            return Err(Error::Version { found: version, expected: PERTURBATION_VERSION });
        }
        let code = r.read_u8().map_err(trunc)?;
        let mode = TransformMode::from_code(code).ok_or_else(|| Error::Corrupt(format!("unknown mode code {code}")))?;
        let eps = r.read_f64::<LE>().map_err(trunc)?;
        let d = r.read_u32::<LE>().map_err(trunc)? as usize;
        let remaining = bytes.len() - r.position() as usize;
        if remaining != 8 * d {
            return Err(Error::Corrupt(format!("expected {} bytes of noise, found {remaining}", 8 * d)));
        }
        let mut buf = vec![0f64; d];
        r.read_f64_into::<LE>(&mut buf).map_err(trunc)?;
        Self::new(buf.into_iter().map(T::of).collect(), mode, T::of(eps))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// `½(tanh(u) + 1)` evaluated as a logistic so that it stays strictly inside
/// `(0,1)`; saturated values are pinned to the nearest representable interior
/// point.
#[inline]
pub(crate) fn squash<T: Scalar>(u: T) -> T {
    let z = T::one() / (T::one() + (-(u + u)).exp());
    let top = T::one() - T::epsilon() / T::of(2.0);
    z.max(T::min_positive_value()).min(top)
}

/// Perturbed samples `Z` for every row of `x`.
pub fn transform<T: Scalar>(x: &Tensor<T>, p: &Perturbation<T>) -> Result<Tensor<T>> {
    if x.shape().len() != 2 || x.cols() != p.dim() {
        return dim_err(format!("perturbation of dimension {} cannot apply to {:?}", p.dim(), x.shape()));
    }
    let n = p.noise.as_slice();
    let mut out = Vec::with_capacity(x.len());
    for row in x.row_iter() {
        out.extend(row.iter().zip(n).map(|(&v, &nj)| squash(p.base(v) + nj)));
    }
    Tensor::new(x.shape().to_vec(), out)
}

/// Copy of `data` with its features replaced by the perturbed samples.
pub fn apply<T: Scalar>(data: &Dataset<T>, p: &Perturbation<T>) -> Result<Dataset<T>> {
    data.with_features(transform(data.features(), p)?)
}
