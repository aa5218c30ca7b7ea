use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::scalar::Scalar;

/// Moment estimates for one parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub first_moment: Tensor<T>,
    pub second_moment: Tensor<T>,
    pub step: u64,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub learning_rate: T,
}

impl<T: Scalar> AdamState<T> {
    /// Fresh state with the usual defaults (0.9, 0.999, 1e-8).
    pub fn new(shape: &[usize], learning_rate: T) -> Self {
        Self {
            first_moment: Tensor::zeros(shape),
            second_moment: Tensor::zeros(shape),
            step: 0,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
            learning_rate,
        }
    }
}

/// One bias-corrected Adam update of `param` in place.
pub fn adam_step<T: Scalar>(param: &mut Tensor<T>, grad: &Tensor<T>, state: &mut AdamState<T>) -> Result<()> {
    param.check_same_shape(grad)?;
    if state.first_moment.shape() != param.shape() {
        return Err(Error::Dimension(format!(
            "optimizer state tracks shape {:?}, parameter has {:?}",
            state.first_moment.shape(),
            param.shape()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let one = T::one();
    let c1 = one - b1.powi(t);
    let c2 = one - b2.powi(t);
    let m = state.first_moment.as_mut_slice();
    let v = state.second_moment.as_mut_slice();
    for (((p, &g), mi), vi) in param.as_mut_slice().iter_mut().zip(grad.as_slice()).zip(m).zip(v) {
        *mi = b1 * *mi + (one - b1) * g;
        *vi = b2 * *vi + (one - b2) * g * g;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *p -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Plain gradient descent step.
pub fn sgd_step<T: Scalar>(param: &mut Tensor<T>, grad: &Tensor<T>, learning_rate: T) -> Result<()> {
    param.check_same_shape(grad)?;
    for (p, &g) in param.as_mut_slice().iter_mut().zip(grad.as_slice()) {
        *p -= learning_rate * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = Tensor::vector(vec![0.3, -1.2]);
        let before = p.clone();
        let mut st = AdamState::new(&[2], 0.1);
        adam_step(&mut p, &Tensor::zeros(&[2]), &mut st).unwrap();
        assert_eq!(p, before);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Tensor::vector(vec![0.0f64]);
        let mut st = AdamState::new(&[1], 0.1);
        adam_step(&mut p, &Tensor::vector(vec![1.0]), &mut st).unwrap();
        // m̂ = v̂ = 1, so the step is lr / (1 + eps)
        assert!((p.as_slice()[0] + 0.099_999_999_000_000_02).abs() < 1e-15);
    }

    #[test]
    fn converges_on_square() {
        let mut p = Tensor::vector(vec![1.0f64]);
        let mut st = AdamState::new(&[1], 0.1);
        for _ in 0..100 {
            let g = Tensor::vector(vec![2.0 * p.as_slice()[0]]);
            adam_step(&mut p, &g, &mut st).unwrap();
        }
        assert!(p.as_slice()[0].abs() < 0.05, "p = {}", p.as_slice()[0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Tensor::vector(vec![1.0]);
        let mut st = AdamState::new(&[1], 0.1);
        assert!(adam_step(&mut p, &Tensor::zeros(&[2]), &mut st).is_err());
    }
}
