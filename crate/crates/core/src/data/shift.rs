use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::{Rng, Tensor};
use crate::scalar::Scalar;

/// Distribution change applied to an existing dataset.
///
/// Scaling and rotation act about the centre of the unit cube; then the
/// translation and brightness offset are added, Gaussian noise is drawn, and
/// every feature is clamped back into `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftSpec {
    /// Empty means no translation.
    pub translation: Vec<f64>,
    pub scale: f64,
    /// Radians; only meaningful for 2-D features.
    pub rotation: f64,
    pub brightness: f64,
    pub noise_sigma: f64,
}

impl Default for ShiftSpec {
    fn default() -> Self {
        Self { translation: Vec::new(), scale: 1.0, rotation: 0.0, brightness: 0.0, noise_sigma: 0.0 }
    }
}

impl ShiftSpec {
    pub fn translate(t: Vec<f64>) -> Self {
        Self { translation: t, ..Self::default() }
    }

    pub fn brightness(offset: f64) -> Self {
        Self { brightness: offset, ..Self::default() }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.translation.is_empty() && self.translation.len() != dim {
            return Err(Error::Dimension(format!(
                "translation has {} entries for {dim} features",
                self.translation.len()
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        if self.rotation != 0.0 && dim != 2 {
            return Err(Error::Config("rotation is only defined for 2-D features".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma must be non-negative, got {}", self.noise_sigma)));
        }
        let finite = self.translation.iter().chain([&self.rotation, &self.brightness]).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("shift parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Returns a shifted copy; labels are preserved.
pub fn shift<T: Scalar>(data: &Dataset<T>, spec: &ShiftSpec, seed: u64) -> Result<Dataset<T>> {
    let d = data.dim();
    spec.validate(d)?;
    let mut rng = Rng::new(seed);
    let affine = spec.scale != 1.0 || spec.rotation != 0.0;
    let (sin, cos) = spec.rotation.sin_cos();
    let mut out = Vec::with_capacity(data.len() * d);
    let mut row = vec![0.0; d];
    for x in data.features().row_iter() {
        for (r, v) in row.iter_mut().zip(x) {
            *r = v.to_f64_lossy();
        }
        if affine {
            for r in row.iter_mut() {
                *r = (*r - 0.5) * spec.scale;
            }
            if d == 2 && spec.rotation != 0.0 {
                let (a, b) = (row[0], row[1]);
                row[0] = cos * a - sin * b;
                row[1] = sin * a + cos * b;
            }
            for r in row.iter_mut() {
                *r += 0.5;
            }
        }
        for (j, r) in row.iter_mut().enumerate() {
            if let Some(t) = spec.translation.get(j) {
                *r += t;
            }
            if spec.brightness != 0.0 {
                *r += spec.brightness;
            }
            if spec.noise_sigma > 0.0 {
                *r += rng.normal(0.0, spec.noise_sigma);
            }
            out.push(T::of(r.clamp(0.0, 1.0)));
        }
    }
    data.with_features(Tensor::new(data.features().shape().to_vec(), out)?)
}
