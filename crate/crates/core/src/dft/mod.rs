//! Data fine-tuning: one universal perturbation per dataset, learned against
//! a frozen classifier so that the perturbed data is classified better while
//! staying close to the original.

mod learn;
mod objective;
mod perturbation;

pub use crate::data::{one_hot, OneHot};
pub use learn::{learn_perturbation, DftConfig, DftOutcome, Optimizer};
pub use objective::{distance, grad_perturbation, hinge_loss, objective, objective_and_grad};
pub use perturbation::{
    apply, transform, Perturbation, TransformMode, DEFAULT_CLAMP_EPS, PERTURBATION_MAGIC, PERTURBATION_VERSION,
};
