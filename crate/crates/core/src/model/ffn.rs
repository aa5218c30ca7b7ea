use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{dim_err, Error, Result};
use crate::math::{adam_step, matmul, matmul_at, matmul_bt, softmax_rows, AdamState, Rng, Tensor};
use crate::model::{Activation, Layer};
use crate::scalar::Scalar;

/// Hyperparameters for training a classifier with Adam on softmax cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub hidden_dims: Vec<usize>,
    pub hidden_activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 0.005,
            batch_size: 32,
            seed: 0,
            hidden_dims: vec![32, 32],
            hidden_activation: Activation::Relu,
        }
    }
}

impl TrainConfig {
    /// Two hidden layers of 512 units, the full-size classifier head.
    pub fn full_scale() -> Self {
        Self { hidden_dims: vec![512, 512], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be finite and non-negative", self.learning_rate)));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        Ok(())
    }
}

/// Full-dataset cross-entropy before training and after each epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Stack of affine layers with a softmax head, classifying one attribute.
///
/// Once frozen the weights can only be read: scores and input gradients are
/// available, training is refused.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardModel<T> {
    layers: Vec<Layer<T>>,
    frozen: bool,
    attribute: String,
}

/// Activations kept from a forward pass for the backward pass.
struct Trace<T> {
    /// `inputs[l]` feeds layer `l`; the last entry is the logits.
    inputs: Vec<Tensor<T>>,
    pre: Vec<Tensor<T>>,
}

pub(crate) struct ParamGrads<T> {
    pub weights: Vec<Tensor<T>>,
    pub biases: Vec<Tensor<T>>,
}

impl<T: Scalar> FeedForwardModel<T> {
    pub fn from_layers(attribute: impl Into<String>, layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return dim_err("a model needs at least one layer");
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return dim_err(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].output_dim(),
                    i + 1,
                    pair[1].input_dim()
                ));
            }
        }
        let classes = layers.last().map_or(0, Layer::output_dim);
        if classes < 2 {
            return dim_err(format!("softmax head needs at least 2 classes, got {classes}"));
        }
        Ok(Self { layers, frozen: false, attribute: attribute.into() })
    }

    /// Glorot-uniform initialised network `input → hidden... → classes`.
    /// The output layer is linear; the softmax head is applied by `forward`.
    pub fn initialize(
        attribute: impl Into<String>,
        input_dim: usize,
        classes: usize,
        hidden: &[usize],
        hidden_activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(classes);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out).map(|_| T::of(rng.uniform(-limit, limit))).collect();
                let act = if i + 2 == dims.len() { Activation::Identity } else { hidden_activation };
                Layer::new(Tensor::new(vec![fan_out, fan_in], weights)?, Tensor::zeros(&[fan_out]), act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(attribute, layers)
    }

    /// Builds an unfrozen model sized for `data`'s attribute from a training config.
    pub fn for_dataset(data: &Dataset<T>, attribute: &str, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        Self::initialize(
            attribute,
            data.dim(),
            data.classes(attribute)?,
            &config.hidden_dims,
            config.hidden_activation,
            config.seed,
        )
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn classes(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn unfreeze(&mut self) {
        self.frozen = false;
    }

    pub(crate) fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        if x.shape().len() != 2 || x.cols() != self.input_dim() {
            return dim_err(format!(
                "model expects m×{} input, got {:?}",
                self.input_dim(),
                x.shape()
            ));
        }
        Ok(())
    }

    fn run(&self, x: &Tensor<T>) -> Result<Trace<T>> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        inputs.push(x.clone());
        for layer in &self.layers {
            let mut z = matmul_bt(inputs.last().unwrap(), &layer.weights)?;
            let out = layer.output_dim();
            for row in z.as_mut_slice().chunks_mut(out) {
                for (v, &b) in row.iter_mut().zip(layer.bias.as_slice()) {
                    *v += b;
                }
            }
            let a = z.map(|v| layer.activation.apply(v));
            pre.push(z);
            inputs.push(a);
        }
        Ok(Trace { inputs, pre })
    }

    /// Raw outputs of the last layer, before the softmax head.
    pub fn logits(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.run(x)?.inputs.pop().unwrap())
    }

    /// Class scores `m×C`; each row is a probability vector.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(softmax_rows(&self.logits(x)?))
    }

    /// Predicted class per row, ties to the lowest index.
    pub fn predict(&self, x: &Tensor<T>) -> Result<Vec<usize>> {
        let scores = self.forward(x)?;
        Ok(scores.row_iter().map(crate::math::argmax).collect())
    }

    /// Backward pass from `dL/dlogits`, producing the input gradient and
    /// (optionally) parameter gradients.
    fn backward(&self, trace: &Trace<T>, dlogits: Tensor<T>, want_params: bool) -> Result<(Tensor<T>, Option<ParamGrads<T>>)> {
        let n = self.layers.len();
        let mut wgrads = Vec::new();
        let mut bgrads = Vec::new();
        // gradient w.r.t. the activation output of layer l
        let mut upstream = dlogits;
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let mut delta = upstream;
            if layer.activation != Activation::Identity {
                let pre = trace.pre[l].as_slice();
                let post = trace.inputs[l + 1].as_slice();
                for ((d, &p), &a) in delta.as_mut_slice().iter_mut().zip(pre).zip(post) {
                    *d *= layer.activation.derivative(p, a);
                }
            }
            if want_params {
                wgrads.push(matmul_at(&delta, &trace.inputs[l])?);
                let out = layer.output_dim();
                let mut db = vec![T::zero(); out];
                for row in delta.as_slice().chunks(out) {
                    for (acc, &v) in db.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                bgrads.push(Tensor::vector(db));
            }
            upstream = matmul(&delta, &layer.weights)?;
        }
        let params = want_params.then(|| {
            wgrads.reverse();
            bgrads.reverse();
            ParamGrads { weights: wgrads, biases: bgrads }
        });
        Ok((upstream, params))
    }

    /// `∂L/∂X` given `∂L/∂scores`, chaining through the softmax head and every
    /// layer. Parameters are not touched, so this is allowed on frozen models.
    pub fn grad_input(&self, x: &Tensor<T>, dl_dscores: &Tensor<T>) -> Result<Tensor<T>> {
        let trace = self.run(x)?;
        let c = self.classes();
        if dl_dscores.shape() != [x.rows(), c] {
            return dim_err(format!(
                "upstream gradient {:?} does not match scores [{}, {c}]",
                dl_dscores.shape(),
                x.rows()
            ));
        }
        let scores = softmax_rows(trace.inputs.last().unwrap());
        let dlogits = softmax_backward(&scores, dl_dscores);
        Ok(self.backward(&trace, dlogits, false)?.0)
    }

    /// `∂L/∂X` given the gradient with respect to the pre-softmax logits.
    pub fn grad_input_from_logits(&self, x: &Tensor<T>, dl_dlogits: &Tensor<T>) -> Result<Tensor<T>> {
        let trace = self.run(x)?;
        if dl_dlogits.shape() != [x.rows(), self.classes()] {
            return dim_err(format!(
                "upstream gradient {:?} does not match logits [{}, {}]",
                dl_dlogits.shape(),
                x.rows(),
                self.classes()
            ));
        }
        Ok(self.backward(&trace, dl_dlogits.clone(), false)?.0)
    }

    /// Mean softmax cross-entropy over `x` against `labels`.
    pub fn cross_entropy(&self, x: &Tensor<T>, labels: &[usize]) -> Result<f64> {
        let scores = self.forward(x)?;
        check_labels(labels, x.rows(), self.classes())?;
        if labels.is_empty() {
            return Ok(0.0);
        }
        let tiny = T::min_positive_value();
        let total = scores
            .row_iter()
            .zip(labels)
            .fold(T::zero(), |acc, (row, &y)| acc - row[y].max(tiny).ln());
        Ok(total.to_f64_lossy() / labels.len() as f64)
    }

    fn cross_entropy_grads(&self, x: &Tensor<T>, labels: &[usize]) -> Result<ParamGrads<T>> {
        let trace = self.run(x)?;
        let mut dlogits = softmax_rows(trace.inputs.last().unwrap());
        let m = T::of(labels.len() as f64);
        let c = self.classes();
        for (row, &y) in dlogits.as_mut_slice().chunks_mut(c).zip(labels) {
            row[y] -= T::one();
            for v in row.iter_mut() {
                *v /= m;
            }
        }
        Ok(self.backward(&trace, dlogits, true)?.1.unwrap())
    }

    /// Trains in place with Adam on softmax cross-entropy.
    ///
    /// Batches are drawn in a seeded shuffled order each epoch; the final
    /// partial batch is kept.
    pub fn train(&mut self, data: &Dataset<T>, config: &TrainConfig) -> Result<TrainReport> {
        if self.frozen {
            return Err(Error::FrozenModel);
        }
        config.validate()?;
        let labels = data.labels(&self.attribute)?;
        check_labels(labels, data.len(), self.classes())?;
        self.check_input(data.features())?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }

        let lr = T::of(config.learning_rate);
        let mut w_state: Vec<_> = self.layers.iter().map(|l| AdamState::new(l.weights.shape(), lr)).collect();
        let mut b_state: Vec<_> = self.layers.iter().map(|l| AdamState::new(l.bias.shape(), lr)).collect();
        let mut rng = Rng::new(config.seed).fork(1);
        let x = data.features();
        let initial_loss = self.cross_entropy(x, labels)?;
        let mut epoch_losses = Vec::with_capacity(config.epochs);
        let mut order: Vec<usize> = (0..data.len()).collect();

        for _ in 0..config.epochs {
            rng.shuffle(&mut order);
            for batch in order.chunks(config.batch_size) {
                let bx = x.select_rows(batch);
                let by: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                let grads = self.cross_entropy_grads(&bx, &by)?;
                for (l, layer) in self.layers.iter_mut().enumerate() {
                    adam_step(&mut layer.weights, &grads.weights[l], &mut w_state[l])?;
                    adam_step(&mut layer.bias, &grads.biases[l], &mut b_state[l])?;
                }
            }
            epoch_losses.push(self.cross_entropy(x, labels)?);
        }
        Ok(TrainReport { initial_loss, epoch_losses })
    }

    /// Model fine-tuning: trains a copy on `data` and returns it. The
    /// receiver is left untouched whether or not it is frozen; the copy keeps
    /// the receiver's frozen flag.
    pub fn fine_tune(&self, data: &Dataset<T>, config: &TrainConfig) -> Result<(Self, TrainReport)> {
        let mut copy = self.clone();
        copy.unfreeze();
        let report = copy.train(data, config)?;
        copy.set_frozen(self.frozen);
        Ok((copy, report))
    }
}

/// `dL/dlogits = s ⊙ (g − ⟨s, g⟩)` row by row.
fn softmax_backward<T: Scalar>(scores: &Tensor<T>, dl_dscores: &Tensor<T>) -> Tensor<T> {
    let c = scores.cols();
    let mut out = Vec::with_capacity(scores.len());
    for (s, g) in scores.as_slice().chunks(c).zip(dl_dscores.as_slice().chunks(c)) {
        let inner = crate::math::dot(s, g);
        out.extend(s.iter().zip(g).map(|(&si, &gi)| si * (gi - inner)));
    }
    Tensor::new(scores.shape().to_vec(), out).expect("same shape as scores")
}

pub(crate) fn check_labels(labels: &[usize], m: usize, classes: usize) -> Result<()> {
    if labels.len() != m {
        return dim_err(format!("{} labels for {m} samples", labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label: bad, classes });
    }
    Ok(())
}
