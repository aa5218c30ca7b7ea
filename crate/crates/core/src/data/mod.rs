//! Datasets: synthetic generators, distribution shifts, splits and file formats.

mod blobs;
mod dataset;
mod io;
mod onehot;
mod shift;
mod split;
mod toy;

pub use blobs::{gen_blobs, BlobSpec, SYNTHETIC_ATTRIBUTE};
pub use dataset::{Attribute, AttributeSchema, Dataset, SplitTag};
pub use io::{load_csv, load_csv_with_schema, load_idx, save_csv, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, LABEL_PREFIX};
pub use onehot::{one_hot, OneHot};
pub use shift::{shift, ShiftSpec};
pub use split::{split, STANDARD_SPLIT};
pub use toy::{gen_toy_images, ToyKind, ToyParams, ToyShift, TOY_DIM, TOY_SIDE};
