//! Feed-forward attribute classifier that can be trained, then frozen and
//! used only through its scores and input gradients.

mod ffn;
mod io;
mod layer;

pub use ffn::{FeedForwardModel, TrainConfig, TrainReport};
pub(crate) use ffn::check_labels;
pub use io::{MODEL_MAGIC, MODEL_VERSION};
pub use layer::{Activation, Layer};
