//! Accuracy, confusion matrices, ROC curves and score histograms.

mod classification;
mod curves;

pub use classification::{accuracy, accuracy_from_scores, confusion, predictions, ConfusionMatrix};
pub use curves::{
    histogram, histogram_from_scores, overlap, roc, roc_from_scores, RocCurve, RocPoint, ScoreHistogram, DEFAULT_BINS,
};
