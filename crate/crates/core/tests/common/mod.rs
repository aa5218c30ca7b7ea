#![allow(dead_code)]

use dfine_core::data::{gen_blobs, shift, split, BlobSpec, Dataset, ShiftSpec, SYNTHETIC_ATTRIBUTE, STANDARD_SPLIT};
use dfine_core::math::{Rng, Tensor};
use dfine_core::model::{FeedForwardModel, TrainConfig};

/// Central difference `(f(x + h e_i) − f(x − h e_i)) / 2h` for one coordinate.
pub fn central_diff(f: impl Fn(&Tensor<f64>) -> f64, x: &Tensor<f64>, i: usize, h: f64) -> f64 {
    let mut xp = x.clone();
    xp.as_mut_slice()[i] += h;
    let mut xm = x.clone();
    xm.as_mut_slice()[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

pub fn uniform(rng: &mut Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.uniform(lo, hi)).collect()).unwrap()
}

pub struct Shifted {
    pub model: FeedForwardModel<f64>,
    pub source_test: Dataset<f64>,
    pub train: Dataset<f64>,
    pub test: Dataset<f64>,
}

/// Two tight blobs separated along x; the model is trained on them and the
/// target data is the same blobs translated by 0.3 along x.
pub fn shifted_blobs(seed: u64) -> Shifted {
    let spec = BlobSpec { centers: vec![[0.0, 0.0], [1.0, 0.0]], sigmas: vec![0.15, 0.15], counts: vec![2000, 2000] };
    let source: Dataset<f64> = gen_blobs(&spec, seed).unwrap();
    let (src_train, _, source_test) = split(&source, STANDARD_SPLIT, seed).unwrap();
    let cfg = TrainConfig { seed, ..TrainConfig::default() };
    let mut model = FeedForwardModel::for_dataset(&src_train, SYNTHETIC_ATTRIBUTE, &cfg).unwrap();
    model.train(&src_train, &cfg).unwrap();
    model.freeze();
    let target = shift(&source, &ShiftSpec::translate(vec![0.3, 0.0]), seed).unwrap();
    let (train, _, test) = split(&target, STANDARD_SPLIT, seed.wrapping_add(1)).unwrap();
    Shifted { model, source_test, train, test }
}
