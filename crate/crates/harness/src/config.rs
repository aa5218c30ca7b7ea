use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dfine_core::data::{
    gen_blobs, gen_toy_images, load_csv, load_idx, BlobSpec, ShiftSpec, ToyKind, ToyParams, ToyShift, STANDARD_SPLIT,
};
use dfine_core::dft::{DftConfig, TransformMode};
use dfine_core::model::TrainConfig;
use dfine_core::Dataset;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Intra,
    Inter,
    MftVsDft,
    Iterative,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Intra => "intra",
            Scenario::Inter => "inter",
            Scenario::MftVsDft => "mft-vs-dft",
            Scenario::Iterative => "iterative",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intra" => Ok(Scenario::Intra),
            "inter" => Ok(Scenario::Inter),
            "mft-vs-dft" => Ok(Scenario::MftVsDft),
            "iterative" => Ok(Scenario::Iterative),
            other => invalid(format!("unknown scenario '{other}'")),
        }
    }
}

/// Toy image generator settings; `params` defaults to the kind's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub pattern: ToyKind,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ToyParams>,
    #[serde(default)]
    pub shift: ToyShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSpec {
    Blobs(BlobSpec),
    Toy(ToySpec),
    Csv { path: PathBuf },
    Idx { images: PathBuf, labels: PathBuf },
}

impl DataSpec {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        Ok(match self {
            DataSpec::Blobs(spec) => gen_blobs(spec, seed)?,
            DataSpec::Toy(t) => {
                let params = t.params.clone().unwrap_or_else(|| ToyParams::for_kind(t.pattern));
                gen_toy_images(t.pattern, t.count, &params, &t.shift, seed)?
            }
            DataSpec::Csv { path } => load_csv(path)?,
            DataSpec::Idx { images, labels } => load_idx(images, labels)?,
        })
    }

    fn paths(&self) -> Vec<&Path> {
        match self {
            DataSpec::Csv { path } => vec![path],
            DataSpec::Idx { images, labels } => vec![images, labels],
            _ => Vec::new(),
        }
    }
}

/// Where the evaluation data comes from when it differs from the model's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// The source dataset with a distribution change applied.
    Shift(ShiftSpec),
    /// An independently generated or loaded dataset.
    Dataset(DataSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    /// Load a trained model instead of training one on the source data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Attribute to classify; defaults to the dataset's first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
}

/// Everything needed to reproduce one experiment.
///
/// The top-level `seed` overrides the seeds of `train`, `mft` and `dft`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub source: DataSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub dft: DftConfig,
    /// Settings for the model fine-tuning arm.
    #[serde(default = "default_mft")]
    pub mft: TrainConfig,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    /// Skip the fine-tuning half of each iterative round.
    #[serde(default)]
    pub dft_only: bool,
    #[serde(default = "default_splits")]
    pub splits: [f64; 3],
    #[serde(default = "default_positive")]
    pub positive_class: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_mft() -> TrainConfig {
    TrainConfig { epochs: 5, ..TrainConfig::default() }
}

fn default_rounds() -> usize {
    2
}

fn default_splits() -> [f64; 3] {
    STANDARD_SPLIT
}

fn default_positive() -> usize {
    1
}

fn default_bins() -> usize {
    dfine_core::metrics::DEFAULT_BINS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Built-in scenario setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Two tight blobs; the target is the same data translated 0.3 along x.
    ShiftedBlobs,
    /// Two overlapping blobs of unequal spread with a linear classifier.
    OverlapBlobs,
    /// 8×8 faint-spot images; the target is a fresh sample 0.2 brighter.
    ToyBrightness,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shifted-blobs" => Ok(Preset::ShiftedBlobs),
            "overlap-blobs" => Ok(Preset::OverlapBlobs),
            "toy-brightness" => Ok(Preset::ToyBrightness),
            other => invalid(format!("unknown preset '{other}'")),
        }
    }
}

impl Preset {
    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Intra => Preset::OverlapBlobs,
            _ => Preset::ShiftedBlobs,
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, scenario: Scenario, seed: u64) -> Self {
        let blobs = |sigmas: Vec<f64>| {
            DataSpec::Blobs(BlobSpec { centers: vec![[0.0, 0.0], [1.0, 0.0]], sigmas, counts: vec![2000, 2000] })
        };
        let dft = DftConfig { mode: TransformMode::Preimage, ..DftConfig::default() };
        let mut cfg = ExperimentConfig {
            scenario,
            seed,
            source: blobs(vec![0.15, 0.15]),
            target: None,
            model: ModelSpec::default(),
            train: TrainConfig::default(),
            dft,
            mft: default_mft(),
            rounds: default_rounds(),
            dft_only: false,
            splits: default_splits(),
            positive_class: default_positive(),
            bins: default_bins(),
            output_dir: default_output_dir(),
        };
        match preset {
            Preset::ShiftedBlobs => cfg.target = Some(Target::Shift(ShiftSpec::translate(vec![0.3, 0.0]))),
            Preset::OverlapBlobs => {
                cfg.source = blobs(vec![0.5, 0.15]);
                cfg.train.hidden_dims = Vec::new();
                cfg.mft.hidden_dims = Vec::new();
            }
            Preset::ToyBrightness => {
                let toy = |brightness: f64| {
                    DataSpec::Toy(ToySpec {
                        pattern: ToyKind::BrightnessBlob,
                        count: 4000,
                        params: None,
                        shift: ToyShift { brightness, ..ToyShift::default() },
                    })
                };
                cfg.source = toy(0.0);
                cfg.target = Some(Target::Dataset(toy(0.2)));
            }
        }
        if scenario == Scenario::Intra {
            cfg.target = None;
        }
        cfg
    }

    /// Layers a JSON config file over a preset: keys present in the file win,
    /// nested objects are merged key by key.
    pub fn from_json_over(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let mut merged = serde_json::to_value(base)?;
        let overlay: Value = serde_json::from_str(text)?;
        if !overlay.is_object() {
            return invalid("config file must hold a JSON object");
        }
        merge(&mut merged, overlay);
        Ok(serde_json::from_value(merged)?)
    }

    /// Propagates the top-level seed into the sub-configs.
    pub fn resolved(mut self) -> Self {
        self.train.seed = self.seed;
        self.mft.seed = self.seed;
        self.dft.seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.mft.validate()?;
        self.dft.validate()?;
        if self.rounds == 0 {
            return invalid("rounds must be at least 1");
        }
        if self.bins < 2 {
            return invalid("histograms need at least 2 bins");
        }
        if self.scenario != Scenario::Intra && self.target.is_none() {
            return invalid(format!("scenario '{}' needs a target dataset", self.scenario));
        }
        let mut paths = self.source.paths();
        if let Some(Target::Dataset(d)) = &self.target {
            paths.extend(d.paths());
        }
        if let Some(p) = &self.model.path {
            paths.push(p);
        }
        if let Some(missing) = paths.iter().find(|p| !p.exists()) {
            return invalid(format!("{} does not exist", missing.display()));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                // a different data kind replaces the whole object
                let same_kind = b.get(&k).and_then(|x| x.get("kind")) == v.get("kind");
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() && same_kind => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
