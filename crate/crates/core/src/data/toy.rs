//! 8×8 grayscale images with a binary attribute.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::{AttributeSchema, Dataset, SYNTHETIC_ATTRIBUTE};
use crate::error::{Error, Result};
use crate::math::{Rng, Tensor};
use crate::scalar::Scalar;

pub const TOY_SIDE: usize = 8;
pub const TOY_DIM: usize = TOY_SIDE * TOY_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToyKind {
    /// Horizontal (class 0) or vertical (class 1) stripes with random phase.
    StripeOrientation,
    /// Plain background (class 0) or a bright Gaussian spot at a random
    /// position (class 1).
    BrightnessBlob,
}

impl std::str::FromStr for ToyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stripe-orientation" | "stripes" => Ok(ToyKind::StripeOrientation),
            "brightness-blob" | "blob" => Ok(ToyKind::BrightnessBlob),
            other => Err(Error::Config(format!("unknown toy image kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyParams {
    /// Fraction of samples carrying class 1.
    pub positive_fraction: f64,
    /// Peak deviation of the pattern from the 0.5 background.
    pub amplitude: f64,
    pub pixel_noise: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self::for_kind(ToyKind::StripeOrientation)
    }
}

impl ToyParams {
    /// Faint spots on a quiet background, so the class signal is small next to
    /// a global brightness change.
    pub fn for_kind(kind: ToyKind) -> Self {
        match kind {
            ToyKind::StripeOrientation => Self { positive_fraction: 0.5, amplitude: 0.25, pixel_noise: 0.05 },
            ToyKind::BrightnessBlob => Self { positive_fraction: 0.5, amplitude: 0.08, pixel_noise: 0.02 },
        }
    }
}

/// Global photometric change applied after rendering.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyShift {
    pub brightness: f64,
    /// Multiplies the deviation from 0.5; zero leaves contrast unchanged.
    pub contrast: f64,
    pub noise: f64,
}

pub fn gen_toy_images<T: Scalar>(
    kind: ToyKind,
    count: usize,
    params: &ToyParams,
    shift: &ToyShift,
    seed: u64,
) -> Result<Dataset<T>> {
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&params.positive_fraction) {
        return Err(Error::Config("positive fraction must lie in [0,1]".into()));
    }
    if params.pixel_noise < 0.0 || shift.noise < 0.0 || shift.contrast < 0.0 {
        return Err(Error::Config("noise and contrast must be non-negative".into()));
    }
    let mut rng = Rng::new(seed);
    let positives = (params.positive_fraction * count as f64).round() as usize;
    let mut labels: Vec<usize> = (0..count).map(|i| usize::from(i < positives)).collect();
    rng.shuffle(&mut labels);

    let contrast = if shift.contrast == 0.0 { 1.0 } else { shift.contrast };
    let mut data = Vec::with_capacity(count * TOY_DIM);
    let mut img = [0.0f64; TOY_DIM];
    for &label in &labels {
        render(kind, label, params, &mut rng, &mut img);
        for v in img.iter() {
            let mut p = v + rng.normal(0.0, params.pixel_noise);
            p = 0.5 + (p - 0.5) * contrast + shift.brightness;
            if shift.noise > 0.0 {
                p += rng.normal(0.0, shift.noise);
            }
            data.push(T::of(p.clamp(0.0, 1.0)));
        }
    }
    Dataset::new(
        Tensor::new(vec![count, TOY_DIM], data)?,
        vec![labels],
        AttributeSchema::binary(SYNTHETIC_ATTRIBUTE),
    )
}

fn render(kind: ToyKind, label: usize, params: &ToyParams, rng: &mut Rng, img: &mut [f64; TOY_DIM]) {
    let amp = params.amplitude * rng.uniform(0.7, 1.3);
    match kind {
        ToyKind::StripeOrientation => {
            let phase = rng.uniform(0.0, 2.0 * PI);
            let period = rng.uniform(3.0, 5.0);
            for r in 0..TOY_SIDE {
                for c in 0..TOY_SIDE {
                    let t = if label == 1 { c } else { r } as f64;
                    img[r * TOY_SIDE + c] = 0.5 + amp * (2.0 * PI * t / period + phase).sin();
                }
            }
        }
        ToyKind::BrightnessBlob => {
            let cr = rng.uniform(2.0, 5.0);
            let cc = rng.uniform(2.0, 5.0);
            let width = rng.uniform(1.2, 2.0);
            let peak = if label == 1 { amp } else { 0.0 };
            for r in 0..TOY_SIDE {
                for c in 0..TOY_SIDE {
                    let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
                    img[r * TOY_SIDE + c] = 0.5 + peak * (-d2 / (2.0 * width * width)).exp();
                }
            }
        }
    }
}
