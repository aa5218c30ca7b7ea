use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{dim_err, Error, Result};
use crate::math::{argmax, Tensor};
use crate::model::{check_labels, FeedForwardModel};
use crate::scalar::Scalar;

/// Rows are ground truth, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return dim_err(format!("{} labels vs {} predictions", truth.len(), predicted.len()));
        }
        let mut counts = vec![vec![0u64; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::LabelOutOfRange { label: t.max(p), classes });
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    /// Row-normalised percentages; an empty row stays all zero.
    pub fn rates(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let n: u64 = row.iter().sum();
                row.iter().map(|&c| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 }).collect()
            })
            .collect()
    }

    /// Fraction of class `class` predicted as itself.
    pub fn recall(&self, class: usize) -> f64 {
        let n: u64 = self.counts[class].iter().sum();
        if n == 0 {
            0.0
        } else {
            self.counts[class][class] as f64 / n as f64
        }
    }

    /// Binary true positive rate with class 1 as positive.
    pub fn tpr(&self) -> f64 {
        self.recall(1)
    }

    /// Binary true negative rate with class 0 as negative.
    pub fn tnr(&self) -> f64 {
        self.recall(0)
    }
}

pub fn predictions<T: Scalar>(scores: &Tensor<T>) -> Vec<usize> {
    scores.row_iter().map(argmax).collect()
}

/// Fraction of rows whose argmax equals the label.
pub fn accuracy_from_scores<T: Scalar>(scores: &Tensor<T>, labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_labels(labels, scores.rows(), scores.cols())?;
    let hits = predictions(scores).iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

fn scores_and_labels<'a, T: Scalar>(model: &FeedForwardModel<T>, data: &'a Dataset<T>) -> Result<(Tensor<T>, &'a [usize])> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((model.forward(data.features())?, data.labels(model.attribute())?))
}

pub fn accuracy<T: Scalar>(model: &FeedForwardModel<T>, data: &Dataset<T>) -> Result<f64> {
    let (scores, labels) = scores_and_labels(model, data)?;
    accuracy_from_scores(&scores, labels)
}

pub fn confusion<T: Scalar>(model: &FeedForwardModel<T>, data: &Dataset<T>) -> Result<ConfusionMatrix> {
    let (scores, labels) = scores_and_labels(model, data)?;
    ConfusionMatrix::from_predictions(labels, &predictions(&scores), model.classes())
}

/// Score of `positive` for every sample, together with the labels.
pub(crate) fn positive_scores<T: Scalar>(
    model: &FeedForwardModel<T>,
    data: &Dataset<T>,
    positive: usize,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if model.classes() != 2 {
        return Err(Error::Config(format!(
            "attribute '{}' has {} classes; curve metrics need a binary attribute",
            model.attribute(),
            model.classes()
        )));
    }
    if positive >= 2 {
        return Err(Error::LabelOutOfRange { label: positive, classes: 2 });
    }
    let (scores, labels) = scores_and_labels(model, data)?;
    let s = scores.row_iter().map(|r| r[positive].to_f64_lossy()).collect();
    let l = labels.iter().map(|&y| y == positive).collect();
    Ok((s, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_class_zero_on_balanced() {
        let scores = Tensor::from_rows(&[[0.9, 0.1]; 4]).unwrap();
        let labels = [0, 1, 0, 1];
        assert_eq!(accuracy_from_scores(&scores, &labels).unwrap(), 0.5);
        let cm = ConfusionMatrix::from_predictions(&labels, &predictions(&scores), 2).unwrap();
        assert_eq!(cm.counts, vec![vec![2, 0], vec![2, 0]]);
        assert_eq!((cm.tnr(), cm.tpr()), (1.0, 0.0));
    }

    #[test]
    fn perfect_is_diagonal() {
        let labels = [0, 2, 1, 2];
        let cm = ConfusionMatrix::from_predictions(&labels, &labels, 3).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
        for row in cm.rates() {
            assert!((row.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_sample_and_empty() {
        let scores = Tensor::from_rows(&[[0.2, 0.8]]).unwrap();
        assert_eq!(accuracy_from_scores(&scores, &[1]).unwrap(), 1.0);
        let empty = Tensor::<f64>::zeros(&[0, 2]);
        assert!(matches!(accuracy_from_scores(&empty, &[]), Err(Error::EmptyDataset)));
    }
}
