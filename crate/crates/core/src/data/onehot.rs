use crate::error::{Error, Result};
use crate::math::{argmax, Tensor};
use crate::scalar::Scalar;

/// `m×C` indicator matrix with exactly one 1 per row.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHot<T>(Tensor<T>);

impl<T: Scalar> OneHot<T> {
    pub fn matrix(&self) -> &Tensor<T> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn classes(&self) -> usize {
        self.0.cols()
    }

    /// Recovers the integer labels.
    pub fn labels(&self) -> Vec<usize> {
        self.0.row_iter().map(argmax).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        OneHot(self.0.select_rows(idx))
    }
}

pub fn one_hot<T: Scalar>(labels: &[usize], classes: usize) -> Result<OneHot<T>> {
    let mut t = Tensor::zeros(&[labels.len(), classes]);
    for (k, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::LabelOutOfRange { label: y, classes });
        }
        t.set(k, y, T::one());
    }
    Ok(OneHot(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes() {
        let y = one_hot::<f64>(&[0, 1], 2).unwrap();
        assert_eq!(y.matrix().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert!(one_hot::<f64>(&[2], 2).is_err());
    }

    proptest::proptest! {
        #[test]
        fn argmax_inverts(labels in proptest::collection::vec(0usize..5, 0..40)) {
            let y = one_hot::<f64>(&labels, 5).unwrap();
            proptest::prop_assert_eq!(y.labels(), labels);
            for row in y.matrix().row_iter() {
                proptest::prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
            }
        }
    }
}
