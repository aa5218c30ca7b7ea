use dfine_core::dft::TransformMode;
use dfine_core::metrics::{confusion, histogram, roc, ConfusionMatrix, RocCurve, ScoreHistogram};
use dfine_core::model::TrainReport;
use dfine_core::{Dataset, Model, Tensor};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{invalid, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Test points kept for the scatter plot.
const SCATTER_POINTS: usize = 300;
/// Decision regions are sampled on a `GRID × GRID` lattice over the unit square.
const GRID: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub mode: TransformMode,
    pub seed: u64,
    pub model: ModelInfo,
    pub sizes: Sizes,
    /// Frozen model on the untouched evaluation split.
    pub before: Evaluation,
    /// Frozen model on the evaluation split transformed with zero noise. In
    /// literal mode this is the squashed `(tanh(X)+1)/2` baseline.
    pub zero_noise: Evaluation,
    pub after: Evaluation,
    pub distance: DistanceStats,
    pub perturbation: Vec<f64>,
    /// Batch objective before every optimizer step.
    pub dft_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mft: Option<MftArm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<Round>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatter: Option<Scatter>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub attribute: String,
    pub classes: usize,
    pub input_dim: usize,
    pub hash_before: String,
    pub hash_after: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file_hash: Option<String>,
    pub source_test_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    pub source_train: usize,
    pub dft_train: usize,
    pub evaluation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tnr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roc: Option<RocCurve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<ScoreHistogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    /// Mean over samples and features of `|X − Z|` on the evaluation split.
    pub mean_abs_diff: f64,
    pub max_abs_diff: f64,
    pub train_mean_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MftArm {
    pub evaluation: Evaluation,
    pub loss_trace: Vec<f64>,
    pub model_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub round: usize,
    /// Fine-tuned model on the raw evaluation split.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mft_accuracy: Option<f64>,
    /// Round model on the perturbed evaluation split.
    pub accuracy: f64,
    pub mean_abs_diff: f64,
}

/// 2-D view of the evaluation data before and after the perturbation, over
/// the final model's decision regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub x: Vec<[f64; 2]>,
    pub z: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    pub grid_size: usize,
    /// Predicted class at `(j, i) / (grid_size − 1)`, row `i` major.
    pub grid: Vec<usize>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return invalid(format!(
                "report schema version {} (expected {REPORT_SCHEMA_VERSION})",
                r.schema_version
            ));
        }
        Ok(r)
    }

    pub fn gain(&self) -> f64 {
        self.after.accuracy - self.before.accuracy
    }
}

pub fn evaluate(model: &Model, data: &Dataset, positive: usize, bins: usize) -> Result<Evaluation> {
    let cm = confusion(model, data)?;
    let binary = model.classes() == 2;
    let (roc, histogram) = if binary {
        (Some(roc(model, data, positive)?), Some(histogram(model, data, positive, bins)?))
    } else {
        (None, None)
    };
    Ok(Evaluation {
        accuracy: cm.accuracy(),
        tpr: binary.then(|| cm.tpr()),
        tnr: binary.then(|| cm.tnr()),
        overlap: histogram.as_ref().map(|h| h.overlap()),
        confusion: cm,
        roc,
        histogram,
    })
}

pub fn distance_stats(x: &Tensor, z: &Tensor, train_x: &Tensor, train_z: &Tensor) -> Result<DistanceStats> {
    let mean = |a: &Tensor, b: &Tensor| {
        let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q).abs()).sum();
        s / a.len().max(1) as f64
    };
    Ok(DistanceStats {
        mean_abs_diff: mean(x, z),
        max_abs_diff: x.max_abs_diff(z)?,
        train_mean_abs_diff: mean(train_x, train_z),
    })
}

pub fn mean_abs_diff(x: &Tensor, z: &Tensor) -> Result<f64> {
    Ok(distance_stats(x, z, x, z)?.mean_abs_diff)
}

pub fn model_hash(model: &Model) -> String {
    hash_bytes(&model.to_bytes())
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn scatter(model: &Model, before: &Dataset, after: &Dataset) -> Result<Option<Scatter>> {
    if before.dim() != 2 {
        return Ok(None);
    }
    let n = before.len().min(SCATTER_POINTS);
    let point = |d: &Dataset, k: usize| {
        let r = d.features().row(k);
        [r[0], r[1]]
    };
    let mut lattice = Vec::with_capacity(GRID * GRID * 2);
    for i in 0..GRID {
        for j in 0..GRID {
            lattice.push(j as f64 / (GRID - 1) as f64);
            lattice.push(i as f64 / (GRID - 1) as f64);
        }
    }
    let grid = model.predict(&Tensor::new(vec![GRID * GRID, 2], lattice)?)?;
    let labels = before.labels(model.attribute())?;
    Ok(Some(Scatter {
        x: (0..n).map(|k| point(before, k)).collect(),
        z: (0..n).map(|k| point(after, k)).collect(),
        labels: labels[..n].to_vec(),
        grid_size: GRID,
        grid,
    }))
}
