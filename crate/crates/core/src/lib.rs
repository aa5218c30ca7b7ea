//! Data fine-tuning: adapt a dataset to a frozen classifier by learning one
//! universal additive perturbation, instead of adapting the classifier to the
//! data.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the tools and file formats use.

pub mod data;
pub mod dft;
pub mod error;
pub mod math;
pub mod metrics;
pub mod model;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = math::Tensor<f64>;
pub type Tensor32 = math::Tensor<f32>;
pub type Dataset = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Model = model::FeedForwardModel<f64>;
pub type Model32 = model::FeedForwardModel<f32>;
pub type Perturbation = dft::Perturbation<f64>;
pub type Perturbation32 = dft::Perturbation<f32>;
pub type OneHot = data::OneHot<f64>;
pub type AdamState = math::AdamState<f64>;
