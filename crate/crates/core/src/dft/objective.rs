//! The perturbation objective: a hinge on the true-class score plus a
//! weighted squared distance between original and perturbed samples.

use crate::data::OneHot;
use crate::dft::perturbation::{transform, Perturbation};
use crate::error::{dim_err, Error, Result};
use crate::math::{dot, Tensor};
use crate::model::FeedForwardModel;
use crate::scalar::Scalar;

/// `(1/m) Σ_k max(0, 1 − y_kᵀ s_k)`.
///
/// With softmax scores the hinge never clips, so this equals one minus the
/// mean true-class score; the `max` is kept as written anyway.
pub fn hinge_loss<T: Scalar>(y: &OneHot<T>, scores: &Tensor<T>) -> Result<T> {
    if y.matrix().shape() != scores.shape() {
        return dim_err(format!("labels {:?} vs scores {:?}", y.matrix().shape(), scores.shape()));
    }
    let m = y.rows();
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let total = y
        .matrix()
        .row_iter()
        .zip(scores.row_iter())
        .fold(T::zero(), |acc, (yk, sk)| acc + (T::one() - dot(yk, sk)).max(T::zero()));
    Ok(total / T::of(m as f64))
}

/// `(1/m) Σ_k ‖X_k − Z_k‖²`.
pub fn distance<T: Scalar>(x: &Tensor<T>, z: &Tensor<T>) -> Result<T> {
    x.check_same_shape(z)?;
    let m = x.rows();
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let total = x
        .as_slice()
        .iter()
        .zip(z.as_slice())
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    Ok(total / T::of(m as f64))
}

fn require_frozen<T: Scalar>(model: &FeedForwardModel<T>) -> Result<()> {
    if model.is_frozen() {
        Ok(())
    } else {
        Err(Error::NotFrozen)
    }
}

/// Hinge on the perturbed samples' scores plus `λ · distance`.
pub fn objective<T: Scalar>(
    model: &FeedForwardModel<T>,
    x: &Tensor<T>,
    y: &OneHot<T>,
    p: &Perturbation<T>,
    lambda: T,
) -> Result<T> {
    require_frozen(model)?;
    let z = transform(x, p)?;
    let scores = model.forward(&z)?;
    Ok(hinge_loss(y, &scores)? + lambda * distance(x, &z)?)
}

/// Objective value and its gradient with respect to the noise vector.
///
/// Per sample the hinge contributes `−y/m` to `∂L/∂scores` where it is
/// active (strictly positive) and nothing at or beyond the kink. That is
/// pulled back through the model to `∂L/∂Z`, the distance term adds
/// `2λ(Z − X)/m`, and `∂Z/∂N = ½ sech²(U + N) = 2Z(1 − Z)` maps it onto the
/// noise. Rows are accumulated in index order.
pub fn objective_and_grad<T: Scalar>(
    model: &FeedForwardModel<T>,
    x: &Tensor<T>,
    y: &OneHot<T>,
    p: &Perturbation<T>,
    lambda: T,
) -> Result<(T, Tensor<T>)> {
    require_frozen(model)?;
    let z = transform(x, p)?;
    let scores = model.forward(&z)?;
    if y.matrix().shape() != scores.shape() {
        return dim_err(format!("labels {:?} vs scores {:?}", y.matrix().shape(), scores.shape()));
    }
    let m = x.rows();
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let inv_m = T::one() / T::of(m as f64);
    let c = scores.cols();
    let mut dscores = Vec::with_capacity(m * c);
    for (yk, sk) in y.matrix().row_iter().zip(scores.row_iter()) {
        let active = T::one() - dot(yk, sk) > T::zero();
        dscores.extend(yk.iter().map(|&v| if active { -v * inv_m } else { T::zero() }));
    }
    let dscores = Tensor::new(vec![m, c], dscores)?;
    let dz = model.grad_input(&z, &dscores)?;

    let two = T::of(2.0);
    let d = p.dim();
    let mut grad = vec![T::zero(); d];
    for k in 0..m {
        let (xr, zr, gr) = (x.row(k), z.row(k), dz.row(k));
        for j in 0..d {
            let dist = two * lambda * (zr[j] - xr[j]) * inv_m;
            grad[j] += (gr[j] + dist) * two * zr[j] * (T::one() - zr[j]);
        }
    }
    let value = hinge_loss(y, &scores)? + lambda * distance(x, &z)?;
    Ok((value, Tensor::vector(grad)))
}

pub fn grad_perturbation<T: Scalar>(
    model: &FeedForwardModel<T>,
    x: &Tensor<T>,
    y: &OneHot<T>,
    p: &Perturbation<T>,
    lambda: T,
) -> Result<Tensor<T>> {
    Ok(objective_and_grad(model, x, y, p, lambda)?.1)
}
