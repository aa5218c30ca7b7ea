use serde::{Deserialize, Serialize};

use crate::data::{one_hot, Dataset};
use crate::dft::objective::objective_and_grad;
use crate::dft::perturbation::{Perturbation, TransformMode, DEFAULT_CLAMP_EPS};
use crate::error::{Error, Result};
use crate::math::{adam_step, sgd_step, AdamState, Rng};
use crate::model::FeedForwardModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

/// Settings for learning a universal perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DftConfig {
    pub learning_rate: f64,
    /// Capped at the dataset size.
    pub batch_size: usize,
    pub iters_per_batch: usize,
    pub epochs: usize,
    /// Weight of the distance term.
    pub lambda: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub mode: TransformMode,
    pub clamp_eps: f64,
    /// Reshuffle the batch order every epoch using `seed`.
    pub shuffle: bool,
}

impl Default for DftConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 800,
            iters_per_batch: 16,
            epochs: 5,
            lambda: 1.0,
            seed: 0,
            optimizer: Optimizer::Adam,
            mode: TransformMode::Literal,
            clamp_eps: DEFAULT_CLAMP_EPS,
            shuffle: false,
        }
    }
}

impl DftConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 || self.iters_per_batch == 0 || self.epochs == 0 {
            return bad("batch size, iterations per batch and epochs must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 1.0) {
            return bad("clamp eps must lie in (0,1)");
        }
        Ok(())
    }

    /// Total optimizer steps for a dataset of `m` samples.
    pub fn total_steps(&self, m: usize) -> usize {
        let batches = m.div_ceil(self.batch_size.min(m).max(1));
        batches * self.iters_per_batch * self.epochs
    }
}

#[derive(Debug, Clone)]
pub struct DftOutcome<T> {
    pub perturbation: Perturbation<T>,
    /// Batch objective evaluated before each optimizer step.
    pub trace: Vec<f64>,
}

/// Learns one noise vector for `data` against the frozen `model`.
///
/// The noise starts at zero. Every epoch walks the batches in dataset order
/// (or a seeded shuffle), taking `iters_per_batch` optimizer steps on each;
/// the Adam moments carry over between batches and epochs.
pub fn learn_perturbation<T: Scalar>(
    model: &FeedForwardModel<T>,
    data: &Dataset<T>,
    config: &DftConfig,
) -> Result<DftOutcome<T>> {
    config.validate()?;
    if !model.is_frozen() {
        return Err(Error::NotFrozen);
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dim() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "dataset has {} features, model expects {}",
            data.dim(),
            model.input_dim()
        )));
    }
    let labels = data.labels(model.attribute())?;
    let y = one_hot::<T>(labels, model.classes())?;
    let x = data.features();
    let m = data.len();
    let batch = config.batch_size.min(m);
    let lambda = T::of(config.lambda);
    let lr = T::of(config.learning_rate);

    let mut p = Perturbation::zeros(data.dim(), config.mode);
    p.clamp_eps = T::of(config.clamp_eps);
    let mut adam = AdamState::new(p.noise.shape(), lr);
    let mut rng = Rng::new(config.seed).fork(2);
    let mut order: Vec<usize> = (0..m).collect();
    let mut trace = Vec::with_capacity(config.total_steps(m));

    for _ in 0..config.epochs {
        if config.shuffle {
            rng.shuffle(&mut order);
        }
        for idx in order.chunks(batch) {
            let bx = x.select_rows(idx);
            let by = y.select_rows(idx);
            for _ in 0..config.iters_per_batch {
                let (value, grad) = objective_and_grad(model, &bx, &by, &p, lambda)?;
                trace.push(value.to_f64_lossy());
                match config.optimizer {
                    Optimizer::Adam => adam_step(&mut p.noise, &grad, &mut adam)?,
                    Optimizer::Sgd => sgd_step(&mut p.noise, &grad, lr)?,
                }
            }
        }
    }
    Ok(DftOutcome { perturbation: p, trace })
}
