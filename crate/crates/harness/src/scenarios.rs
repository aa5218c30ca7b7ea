use std::fs;

use dfine_core::data::{shift, split};
use dfine_core::dft::{apply, learn_perturbation, DftOutcome, Perturbation};
use dfine_core::metrics::accuracy;
use dfine_core::model::TrainReport;
use dfine_core::{Dataset, Model};

use crate::config::{ExperimentConfig, Scenario, Target};
use crate::error::{invalid, Error, Result};
use crate::report::{
    distance_stats, evaluate, hash_bytes, mean_abs_diff, model_hash, scatter, Evaluation, MftArm, ModelInfo,
    Report, Round, Sizes, REPORT_SCHEMA_VERSION,
};

/// Offset between the source and an independently generated target seed.
const TARGET_SEED_OFFSET: u64 = 1000;

/// Frozen model plus the splits every scenario works on.
struct Setup {
    model: Model,
    hash: String,
    file_hash: Option<String>,
    training: Option<TrainReport>,
    source_train: usize,
    source_test_accuracy: f64,
    dft_train: Dataset,
    eval: Dataset,
}

fn setup(cfg: &ExperimentConfig, with_target: bool) -> Result<Setup> {
    cfg.validate()?;
    let seed = cfg.seed;
    let source = cfg.source.load(seed)?;
    let (s_train, _, s_test) = split(&source, cfg.splits, seed)?;
    let attribute = match &cfg.model.attribute {
        Some(a) => a.clone(),
        None => source.schema().attributes()[0].name.clone(),
    };

    let (mut model, file_hash, training) = match &cfg.model.path {
        Some(path) => {
            let bytes = fs::read(path)?;
            let model = Model::from_bytes(&bytes)?;
            if model.attribute() != attribute {
                return invalid(format!(
                    "model classifies '{}' but the experiment asks for '{attribute}'",
                    model.attribute()
                ));
            }
            (model, Some(hash_bytes(&bytes)), None)
        }
        None => {
            let mut model = Model::for_dataset(&s_train, &attribute, &cfg.train)?;
            let report = model.train(&s_train, &cfg.train)?;
            (model, None, Some(report))
        }
    };
    model.freeze();
    if cfg.positive_class >= model.classes() {
        return invalid(format!("positive class {} but the model has {} classes", cfg.positive_class, model.classes()));
    }

    let (dft_train, eval) = match (&cfg.target, with_target) {
        (Some(Target::Shift(spec)), true) => {
            let (tr, _, te) = split(&shift(&source, spec, seed)?, cfg.splits, seed)?;
            (tr, te)
        }
        (Some(Target::Dataset(spec)), true) => {
            let (tr, _, te) = split(&spec.load(seed.wrapping_add(TARGET_SEED_OFFSET))?, cfg.splits, seed)?;
            (tr, te)
        }
        _ => (s_train.clone(), s_test.clone()),
    };
    if eval.dim() != model.input_dim() {
        return Err(dfine_core::Error::Dimension(format!(
            "target data has {} features, model expects {}",
            eval.dim(),
            model.input_dim()
        ))
        .into());
    }

    Ok(Setup {
        hash: model_hash(&model),
        source_test_accuracy: accuracy(&model, &s_test)?,
        source_train: s_train.len(),
        model,
        file_hash,
        training,
        dft_train,
        eval,
    })
}

/// Result of learning and applying one perturbation.
struct DftRun {
    outcome: DftOutcome<f64>,
    train_z: Dataset,
    eval_z: Dataset,
}

fn run_dft(model: &Model, s: &Setup, cfg: &ExperimentConfig) -> Result<DftRun> {
    let outcome = learn_perturbation(model, &s.dft_train, &cfg.dft)?;
    Ok(DftRun {
        train_z: apply(&s.dft_train, &outcome.perturbation)?,
        eval_z: apply(&s.eval, &outcome.perturbation)?,
        outcome,
    })
}

fn eval(model: &Model, data: &Dataset, cfg: &ExperimentConfig) -> Result<Evaluation> {
    evaluate(model, data, cfg.positive_class, cfg.bins)
}

/// Assembles the common report fields around the final model and perturbation.
fn report(cfg: &ExperimentConfig, scenario: Scenario, s: &Setup, final_model: &Model, dft: &DftRun) -> Result<Report> {
    let zero = Perturbation::zeros(s.eval.dim(), cfg.dft.mode);
    let hash_after = model_hash(&s.model);
    if hash_after != s.hash {
        return Err(Error::ModelMutated { before: s.hash.clone(), after: hash_after });
    }
    if let (Some(path), Some(before)) = (&cfg.model.path, &s.file_hash) {
        let after = hash_bytes(&fs::read(path)?);
        if &after != before {
            return Err(Error::ModelMutated { before: before.clone(), after });
        }
    }
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario,
        mode: cfg.dft.mode,
        seed: cfg.seed,
        model: ModelInfo {
            attribute: s.model.attribute().to_string(),
            classes: s.model.classes(),
            input_dim: s.model.input_dim(),
            hash_before: s.hash.clone(),
            hash_after,
            file_hash: s.file_hash.clone(),
            source_test_accuracy: s.source_test_accuracy,
            training: s.training.clone(),
        },
        sizes: Sizes { source_train: s.source_train, dft_train: s.dft_train.len(), evaluation: s.eval.len() },
        before: eval(&s.model, &s.eval, cfg)?,
        zero_noise: eval(&s.model, &apply(&s.eval, &zero)?, cfg)?,
        after: eval(final_model, &dft.eval_z, cfg)?,
        distance: distance_stats(
            s.eval.features(),
            dft.eval_z.features(),
            s.dft_train.features(),
            dft.train_z.features(),
        )?,
        perturbation: dft.outcome.perturbation.noise.as_slice().to_vec(),
        dft_trace: dft.outcome.trace.clone(),
        mft: None,
        rounds: Vec::new(),
        scatter: scatter(final_model, &s.eval, &dft.eval_z)?,
        config: ExperimentConfig { scenario, ..cfg.clone() },
    })
}

/// Runs the scenario named in the config.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.scenario {
        Scenario::Intra => run_intra(cfg),
        Scenario::Inter => run_inter(cfg),
        Scenario::MftVsDft => run_mft_vs_dft(cfg),
        Scenario::Iterative => run_iterative(cfg, cfg.rounds),
    }
}

/// DFT on the split the model was trained on; any target is ignored.
pub fn run_intra(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = &cfg.clone().resolved();
    let s = setup(cfg, false)?;
    let dft = run_dft(&s.model, &s, cfg)?;
    report(cfg, Scenario::Intra, &s, &s.model, &dft)
}

/// DFT on the target data against the model trained on the source.
pub fn run_inter(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = &cfg.clone().resolved();
    let s = setup(cfg, true)?;
    let dft = run_dft(&s.model, &s, cfg)?;
    report(cfg, Scenario::Inter, &s, &s.model, &dft)
}

/// Frozen model on raw target data, a fine-tuned copy, and DFT, all on the
/// same splits.
pub fn run_mft_vs_dft(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = &cfg.clone().resolved();
    let s = setup(cfg, true)?;
    let (tuned, train_report) = s.model.fine_tune(&s.dft_train, &cfg.mft)?;
    let mft = MftArm {
        evaluation: eval(&tuned, &s.eval, cfg)?,
        loss_trace: train_report.epoch_losses,
        model_hash: model_hash(&tuned),
    };
    let dft = run_dft(&s.model, &s, cfg)?;
    let mut r = report(cfg, Scenario::MftVsDft, &s, &s.model, &dft)?;
    r.mft = Some(mft);
    Ok(r)
}

/// Alternates fine-tuning on the current view of the target data with DFT
/// against the current model. Each round's perturbation is learned from the
/// raw data, and the next round fine-tunes on data perturbed by it.
pub fn run_iterative(cfg: &ExperimentConfig, rounds: usize) -> Result<Report> {
    if rounds == 0 {
        return invalid("rounds must be at least 1");
    }
    let cfg = &ExperimentConfig { rounds, ..cfg.clone().resolved() };
    let s = setup(cfg, true)?;
    let mut current = s.model.clone();
    let mut view = s.dft_train.clone();
    let mut records = Vec::with_capacity(rounds);
    let mut last = None;
    for round in 1..=rounds {
        let mut mft_accuracy = None;
        if !cfg.dft_only {
            let (tuned, _) = current.fine_tune(&view, &cfg.mft)?;
            mft_accuracy = Some(accuracy(&tuned, &s.eval)?);
            current = tuned;
        }
        let dft = run_dft(&current, &s, cfg)?;
        records.push(Round {
            round,
            mft_accuracy,
            accuracy: accuracy(&current, &dft.eval_z)?,
            mean_abs_diff: mean_abs_diff(s.eval.features(), dft.eval_z.features())?,
        });
        view = dft.train_z.clone();
        last = Some(dft);
    }
    let dft = last.expect("at least one round");
    let mut r = report(cfg, Scenario::Iterative, &s, &current, &dft)?;
    r.rounds = records;
    Ok(r)
}
