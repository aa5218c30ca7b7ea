use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::classification::positive_scores;
use crate::model::FeedForwardModel;
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Samples scoring at or above this are called positive; the origin
    /// carries `+inf`, written as `null` in JSON.
    #[serde(with = "infinite_as_null")]
    pub threshold: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps the threshold down through every distinct score. Tied scores move
/// the curve diagonally, which gives them half credit in the trapezoid area.
pub fn roc_from_scores(scores: &[f64], positive: &[bool]) -> Result<RocCurve> {
    if scores.len() != positive.len() {
        return Err(Error::Dimension(format!("{} scores vs {} labels", scores.len(), positive.len())));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Config("ROC needs both positive and negative samples".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let p = RocPoint { fpr: fp as f64 / n_neg as f64, tpr: tp as f64 / n_pos as f64, threshold: t };
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        points.push(p);
    }
    Ok(RocCurve { points, auc })
}

pub fn roc<T: Scalar>(model: &FeedForwardModel<T>, data: &Dataset<T>, positive: usize) -> Result<RocCurve> {
    let (s, l) = positive_scores(model, data, positive)?;
    roc_from_scores(&s, &l)
}

/// Per-class counts of the positive-class score over equal bins of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub bins: usize,
    pub positive: Vec<u64>,
    pub negative: Vec<u64>,
}

impl ScoreHistogram {
    /// Shared mass of the two normalised histograms: 0 for disjoint, 1 for identical.
    pub fn overlap(&self) -> f64 {
        let np: u64 = self.positive.iter().sum();
        let nn: u64 = self.negative.iter().sum();
        self.positive
            .iter()
            .zip(&self.negative)
            .map(|(&p, &n)| (p as f64 / np as f64).min(n as f64 / nn as f64))
            .sum()
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| i as f64 / self.bins as f64).collect()
    }
}

pub fn histogram_from_scores(scores: &[f64], positive: &[bool], bins: usize) -> Result<ScoreHistogram> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    if scores.len() != positive.len() {
        return Err(Error::Dimension(format!("{} scores vs {} labels", scores.len(), positive.len())));
    }
    let mut h = ScoreHistogram { bins, positive: vec![0; bins], negative: vec![0; bins] };
    for (&s, &p) in scores.iter().zip(positive) {
        let b = ((s.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        if p {
            h.positive[b] += 1;
        } else {
            h.negative[b] += 1;
        }
    }
    if h.positive.iter().sum::<u64>() == 0 || h.negative.iter().sum::<u64>() == 0 {
        return Err(Error::Config("score histogram needs samples from both classes".into()));
    }
    Ok(h)
}

pub fn histogram<T: Scalar>(
    model: &FeedForwardModel<T>,
    data: &Dataset<T>,
    positive: usize,
    bins: usize,
) -> Result<ScoreHistogram> {
    let (s, l) = positive_scores(model, data, positive)?;
    histogram_from_scores(&s, &l, bins)
}

pub fn overlap(h: &ScoreHistogram) -> f64 {
    h.overlap()
}
