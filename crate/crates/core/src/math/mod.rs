//! Dense numeric kernel shared by model training and perturbation learning.

mod adam;
mod ops;
mod rng;
mod tensor;

pub use adam::{adam_step, sgd_step, AdamState};
pub use ops::{
    arctanh_clamped, arctanh_elem, argmax, dot, matmul, matmul_at, matmul_bt, softmax, softmax_into,
    softmax_rows, tanh_elem,
};
pub use rng::Rng;
pub use tensor::Tensor;
