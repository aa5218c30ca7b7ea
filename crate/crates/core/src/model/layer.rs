use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::math::Tensor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the pre-activation and the activation value.
    /// ReLU uses 0 at the kink.
    #[inline]
    pub fn derivative<T: Scalar>(self, pre: T, post: T) -> T {
        match self {
            Activation::Relu => {
                if pre > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - post * post,
            Activation::Identity => T::one(),
        }
    }
}

/// Affine map `W x + b` followed by an elementwise activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    /// `out × in`
    pub weights: Tensor<T>,
    /// `out`
    pub bias: Tensor<T>,
    pub activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn new(weights: Tensor<T>, bias: Tensor<T>, activation: Activation) -> Result<Self> {
        if weights.shape().len() != 2 {
            return dim_err(format!("layer weights must be a matrix, got {:?}", weights.shape()));
        }
        if bias.shape() != [weights.rows()] {
            return dim_err(format!(
                "bias shape {:?} does not match {} outputs",
                bias.shape(),
                weights.rows()
            ));
        }
        Ok(Self { weights, bias, activation })
    }

    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weights: Tensor::zeros(&[output, input]),
            bias: Tensor::zeros(&[output]),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}
