//! Experiment orchestration for data fine-tuning: scenario runners, JSON
//! reports and SVG plots. The `dfine` binary wraps these.

pub mod config;
pub mod error;
pub mod plots;
pub mod report;
pub mod scenarios;

pub use config::{DataSpec, ExperimentConfig, Preset, Scenario, Target};
pub use error::{Error, Result};
pub use plots::{emit_plots, write_curves, PlotManifest};
pub use report::Report;
pub use scenarios::{run, run_inter, run_intra, run_iterative, run_mft_vs_dft};
