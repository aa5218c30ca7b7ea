use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dfine_core::data::{
    gen_blobs, gen_toy_images, load_csv, save_csv, shift, split, BlobSpec, ShiftSpec, ToyKind, ToyParams, ToyShift,
    STANDARD_SPLIT,
};
use dfine_core::dft::{apply, learn_perturbation, DftConfig, Optimizer, TransformMode};
use dfine_core::model::{Activation, TrainConfig};
use dfine_core::{Dataset, Model, Perturbation};
use dfine_harness::report::evaluate;
use dfine_harness::{emit_plots, run, write_curves, ExperimentConfig, Preset, Report, Scenario};

#[derive(Parser)]
#[command(name = "dfine", version, about = "Data fine-tuning: adapt data to a frozen classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    GenData(GenData),
    /// Train a classifier on a CSV dataset and save it frozen.
    TrainModel(TrainModel),
    /// Learn a universal perturbation for a dataset against a frozen model.
    LearnDft(LearnDft),
    /// Write a dataset with a learned perturbation applied.
    ApplyDft(ApplyDft),
    /// Score a model on a dataset, optionally after applying a perturbation.
    Evaluate(Evaluate),
    /// Run a full scenario and write its report, plots and curves.
    Experiment(Experiment),
    /// Render plots from an existing report.
    Plot(Plot),
}

#[derive(Args)]
struct GenData {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// Gaussian blobs in the plane, one per class.
    Blobs {
        /// Class centre as `x,y`; repeat once per class.
        #[arg(long = "center", value_parser = parse_point, default_values = ["0,0", "1,0"])]
        centers: Vec<[f64; 2]>,
        #[arg(long, value_delimiter = ',', default_value = "0.15,0.15")]
        sigmas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2000,2000")]
        counts: Vec<usize>,
        /// Translate the generated data by this vector.
        #[arg(long, value_delimiter = ',')]
        translate: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        rotate: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// 8×8 grayscale images with a binary attribute.
    Toy {
        #[arg(long, default_value = "brightness-blob")]
        pattern: ToyKind,
        #[arg(long, default_value_t = 4000)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        brightness: f64,
        /// Contrast multiplier; 0 leaves contrast unchanged.
        #[arg(long, default_value_t = 0.0)]
        contrast: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args)]
struct GenOut {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write stratified 60/20/20 `_train`, `_val` and `_test` files.
    #[arg(long)]
    split: bool,
}

#[derive(Args)]
struct TrainModel {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Attribute to classify; defaults to the first label column.
    #[arg(long)]
    attribute: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "32,32")]
    hidden: Vec<usize>,
    #[arg(long, default_value = "relu", value_parser = parse_activation)]
    activation: Activation,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DftArgs {
    #[arg(long)]
    mode: Option<TransformMode>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    iters_per_batch: Option<usize>,
    #[arg(long, value_parser = parse_optimizer)]
    optimizer: Option<Optimizer>,
    #[arg(long)]
    shuffle: bool,
}

impl DftArgs {
    fn apply_to(&self, cfg: &mut DftConfig) {
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.iters_per_batch {
            cfg.iters_per_batch = v;
        }
        if let Some(v) = self.optimizer {
            cfg.optimizer = v;
        }
        if self.shuffle {
            cfg.shuffle = true;
        }
    }
}

#[derive(Args)]
struct LearnDft {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    dft: DftArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the objective trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ApplyDft {
    #[arg(long)]
    noise: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Evaluate {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    positive: usize,
    #[arg(long, default_value_t = dfine_core::metrics::DEFAULT_BINS)]
    bins: usize,
    /// Write the full evaluation as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct Experiment {
    scenario: Scenario,
    #[arg(long)]
    seed: u64,
    /// JSON config layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shifted-blobs, overlap-blobs or toy-brightness; defaults by scenario.
    #[arg(long)]
    preset: Option<Preset>,
    /// Parent of the timestamped run directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Write into exactly this directory instead.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Use a saved model instead of training one.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    dft: DftArgs,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    dft_only: bool,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct Plot {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v[..] {
        [x, y] => Ok([x, y]),
        _ => Err(format!("expected x,y but got '{s}'")),
    }
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    match s {
        "relu" => Ok(Activation::Relu),
        "tanh" => Ok(Activation::Tanh),
        "identity" => Ok(Activation::Identity),
        _ => Err(format!("unknown activation '{s}'")),
    }
}

fn parse_optimizer(s: &str) -> Result<Optimizer, String> {
    match s {
        "adam" => Ok(Optimizer::Adam),
        "sgd" => Ok(Optimizer::Sgd),
        _ => Err(format!("unknown optimizer '{s}'")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(h) = cause.downcast_ref::<dfine_harness::Error>() {
            return if h.is_validation() { 1 } else { 2 };
        }
        if let Some(c) = cause.downcast_ref::<dfine_core::Error>() {
            let validation = !matches!(
                c,
                dfine_core::Error::Io(_) | dfine_core::Error::FrozenModel | dfine_core::Error::NotFrozen
            );
            return if validation { 1 } else { 2 };
        }
        if let Some(io) = cause.downcast_ref::<io::Error>() {
            return if io.kind() == io::ErrorKind::NotFound { 1 } else { 2 };
        }
    }
    2
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a),
        Command::TrainModel(a) => train_model(a),
        Command::LearnDft(a) => learn_dft(a),
        Command::ApplyDft(a) => apply_dft(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot(a),
    }
}

fn gen_data(a: GenData) -> anyhow::Result<()> {
    let (data, out): (Dataset, GenOut) = match a.kind {
        GenKind::Blobs { centers, sigmas, counts, translate, rotate, noise, out } => {
            let data = gen_blobs(&BlobSpec { centers, sigmas, counts }, out.seed)?;
            let spec = ShiftSpec { translation: translate, rotation: rotate, noise_sigma: noise, ..ShiftSpec::default() };
            (shift(&data, &spec, out.seed)?, out)
        }
        GenKind::Toy { pattern, count, brightness, contrast, noise, out } => {
            let shift = ToyShift { brightness, contrast, noise };
            (gen_toy_images(pattern, count, &ToyParams::for_kind(pattern), &shift, out.seed)?, out)
        }
    };
    save_csv(&data, &out.out)?;
    println!("wrote {} samples × {} features to {}", data.len(), data.dim(), out.out.display());
    if out.split {
        let (train, val, test) = split(&data, STANDARD_SPLIT, out.seed)?;
        for (tag, part) in [("train", train), ("val", val), ("test", test)] {
            let path = sibling(&out.out, tag);
            save_csv(&part, &path)?;
            println!("wrote {} samples to {}", part.len(), path.display());
        }
    }
    Ok(())
}

/// `dir/name.csv` → `dir/name_<tag>.csv`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{tag}{ext}"))
}

fn load_data(path: &Path) -> anyhow::Result<Dataset> {
    load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<Model> {
    Model::load(path).with_context(|| format!("reading {}", path.display()))
}

fn train_model(a: TrainModel) -> anyhow::Result<()> {
    let data = load_data(&a.data)?;
    let attribute = a.attribute.unwrap_or_else(|| data.schema().attributes()[0].name.clone());
    let mut cfg = TrainConfig { seed: a.seed, hidden_dims: a.hidden, hidden_activation: a.activation, ..TrainConfig::default() };
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    let mut model = Model::for_dataset(&data, &attribute, &cfg)?;
    let report = model.train(&data, &cfg)?;
    model.freeze();
    model.save(&a.out)?;
    println!(
        "trained '{attribute}' classifier: loss {:.4} -> {:.4}, training accuracy {:.4}; saved to {}",
        report.initial_loss,
        report.final_loss(),
        dfine_core::metrics::accuracy(&model, &data)?,
        a.out.display()
    );
    Ok(())
}

fn learn_dft(a: LearnDft) -> anyhow::Result<()> {
    let mut model = load_model(&a.model)?;
    model.freeze();
    let data = load_data(&a.data)?;
    let mut cfg = DftConfig { seed: a.seed, ..DftConfig::default() };
    a.dft.apply_to(&mut cfg);
    let out = learn_perturbation(&model, &data, &cfg)?;
    out.perturbation.save(&a.out)?;
    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["step", "objective"])?;
        for (i, v) in out.trace.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    let before = dfine_core::metrics::accuracy(&model, &data)?;
    let after = dfine_core::metrics::accuracy(&model, &apply(&data, &out.perturbation)?)?;
    println!(
        "{} mode, {} steps: objective {:.4} -> {:.4}, accuracy {before:.4} -> {after:.4}; saved to {}",
        cfg.mode.name(),
        out.trace.len(),
        out.trace.first().copied().unwrap_or(f64::NAN),
        out.trace.last().copied().unwrap_or(f64::NAN),
        a.out.display()
    );
    Ok(())
}

fn apply_dft(a: ApplyDft) -> anyhow::Result<()> {
    let p = Perturbation::load(&a.noise).with_context(|| format!("reading {}", a.noise.display()))?;
    let data = load_data(&a.data)?;
    let z = apply(&data, &p)?;
    save_csv(&z, &a.out)?;
    println!("wrote {} perturbed samples to {}", z.len(), a.out.display());
    Ok(())
}

fn evaluate_cmd(a: Evaluate) -> anyhow::Result<()> {
    let model = load_model(&a.model)?;
    let mut data = load_data(&a.data)?;
    if let Some(path) = &a.noise {
        let p = Perturbation::load(path).with_context(|| format!("reading {}", path.display()))?;
        data = apply(&data, &p)?;
    }
    let e = evaluate(&model, &data, a.positive, a.bins)?;
    println!("accuracy {:.4}", e.accuracy);
    for (truth, row) in e.confusion.counts.iter().enumerate() {
        println!("  true {truth}: {row:?}");
    }
    if let (Some(tpr), Some(tnr)) = (e.tpr, e.tnr) {
        println!("TPR {:.2}%  TNR {:.2}%", 100.0 * tpr, 100.0 * tnr);
    }
    if let (Some(roc), Some(ov)) = (&e.roc, e.overlap) {
        println!("AUC {:.4}  histogram overlap {ov:.4}", roc.auc);
    }
    if let Some(path) = &a.json {
        fs::write(path, serde_json::to_string_pretty(&e)? + "\n")?;
    }
    Ok(())
}

fn experiment_config(a: &Experiment) -> anyhow::Result<ExperimentConfig> {
    let preset = a.preset.unwrap_or_else(|| Preset::for_scenario(a.scenario));
    let mut cfg = ExperimentConfig::preset(preset, a.scenario, a.seed);
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg = ExperimentConfig::from_json_over(&cfg, &text).with_context(|| format!("parsing {}", path.display()))?;
    }
    cfg.scenario = a.scenario;
    cfg.seed = a.seed;
    a.dft.apply_to(&mut cfg.dft);
    if let Some(v) = &a.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &a.model {
        cfg.model.path = Some(v.clone());
    }
    if let Some(v) = a.rounds {
        cfg.rounds = v;
    }
    if a.dft_only {
        cfg.dft_only = true;
    }
    cfg.validate()?;
    Ok(cfg.resolved())
}

/// Creates `<parent>/<scenario>-<unix seconds>-seed<seed>`, adding a counter
/// if a concurrent run already took the name.
fn fresh_run_dir(cfg: &ExperimentConfig) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let base = format!("{}-{stamp}-seed{}", cfg.scenario, cfg.seed);
    for n in 0.. {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let dir = cfg.output_dir.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn experiment(a: Experiment) -> anyhow::Result<()> {
    let cfg = experiment_config(&a)?;
    let report = run(&cfg)?;
    let dir = match &a.run_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            d.clone()
        }
        None => fresh_run_dir(&cfg)?,
    };
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    let noise = Perturbation::new(report.perturbation.clone(), report.mode, cfg.dft.clamp_eps)?;
    noise.save(dir.join("perturbation.bin"))?;
    write_curves(&report, &dir.join("curves"))?;
    if !a.no_plots {
        let manifest = emit_plots(&report, &dir.join("plots"))?;
        for notice in &manifest.notices {
            println!("note: {notice}");
        }
    }
    print_summary(&report);
    println!("run directory: {}", dir.display());
    Ok(())
}

fn print_summary(r: &Report) {
    println!(
        "{} (seed {}, {} mode): source test accuracy {:.4}; target accuracy {:.4} -> {:.4} ({:+.2} points), mean |X-Z| {:.4}",
        r.scenario,
        r.seed,
        r.mode.name(),
        r.model.source_test_accuracy,
        r.before.accuracy,
        r.after.accuracy,
        100.0 * r.gain(),
        r.distance.mean_abs_diff
    );
    if r.mode == TransformMode::Literal {
        println!("  zero-noise literal baseline accuracy {:.4}", r.zero_noise.accuracy);
    }
    if let Some(m) = &r.mft {
        println!("  model fine-tuning arm accuracy {:.4}", m.evaluation.accuracy);
    }
    for round in &r.rounds {
        println!("  round {}: accuracy {:.4}", round.round, round.accuracy);
    }
}

fn plot(a: Plot) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report = Report::from_json(&text)?;
    let manifest = emit_plots(&report, &a.out)?;
    write_curves(&report, &a.out)?;
    for f in &manifest.files {
        println!("wrote {}", a.out.join(f).display());
    }
    for notice in &manifest.notices {
        println!("note: {notice}");
    }
    if manifest.files.is_empty() {
        bail!("report supports no plots");
    }
    Ok(())
}

