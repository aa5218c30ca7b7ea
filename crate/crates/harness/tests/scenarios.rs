use dfine_core::data::{BlobSpec, ShiftSpec};
use dfine_core::model::TrainConfig;
use dfine_harness::config::DataSpec;
use dfine_harness::*;

fn cfg(preset: Preset, scenario: Scenario, seed: u64) -> ExperimentConfig {
    ExperimentConfig::preset(preset, scenario, seed)
}

#[test]
fn zero_shift_inter_matches_intra() {
    let intra = run(&cfg(Preset::OverlapBlobs, Scenario::Intra, 4)).unwrap();
    let mut c = cfg(Preset::OverlapBlobs, Scenario::Inter, 4);
    c.target = Some(Target::Shift(ShiftSpec::default()));
    let inter = run(&c).unwrap();
    assert_eq!(inter.before, intra.before);
    assert_eq!(inter.zero_noise, intra.zero_noise);
    assert_eq!(inter.after, intra.after);
    assert_eq!(inter.distance, intra.distance);
    assert_eq!(inter.perturbation, intra.perturbation);
    assert_eq!(inter.dft_trace, intra.dft_trace);
    assert_eq!(inter.model, intra.model);
    assert_eq!(inter.scatter, intra.scatter);
}

#[test]
fn reruns_are_byte_identical() {
    let c = cfg(Preset::ShiftedBlobs, Scenario::MftVsDft, 5);
    assert_eq!(run(&c).unwrap().to_json().unwrap(), run(&c).unwrap().to_json().unwrap());
}

#[test]
fn report_round_trips_through_json() {
    let r = run(&cfg(Preset::OverlapBlobs, Scenario::Intra, 6)).unwrap();
    assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
}

#[test]
fn separable_blobs_sit_at_the_ceiling() {
    let mut c = cfg(Preset::OverlapBlobs, Scenario::Intra, 2);
    c.source = DataSpec::Blobs(BlobSpec {
        centers: vec![[0.0, 0.0], [1.0, 0.0]],
        sigmas: vec![0.05, 0.05],
        counts: vec![500, 500],
    });
    let r = run(&c).unwrap();
    assert_eq!(r.before.accuracy, 1.0);
    assert_eq!(r.after.accuracy, 1.0);
}

#[test]
fn zero_rate_fine_tuning_matches_frozen_arm() {
    let mut c = cfg(Preset::ShiftedBlobs, Scenario::MftVsDft, 1);
    c.mft = TrainConfig { learning_rate: 0.0, ..c.mft };
    let r = run(&c).unwrap();
    let mft = r.mft.as_ref().unwrap();
    assert_eq!(mft.evaluation, r.before);
    assert_eq!(mft.model_hash, r.model.hash_before);
    assert_eq!(mft.loss_trace.len(), c.mft.epochs);
    assert_eq!(r.dft_trace.len(), c.dft.total_steps(r.sizes.dft_train));
}

#[test]
fn dft_only_single_round_equals_inter() {
    let mut c = cfg(Preset::ShiftedBlobs, Scenario::Iterative, 3);
    c.dft_only = true;
    let it = run_iterative(&c, 1).unwrap();
    let inter = run_inter(&c).unwrap();
    assert_eq!(it.rounds.len(), 1);
    assert_eq!(it.before, inter.before);
    assert_eq!(it.after, inter.after);
    assert_eq!(it.perturbation, inter.perturbation);
    assert_eq!(it.distance, inter.distance);
    assert_eq!(it.rounds[0].accuracy, inter.after.accuracy);
}

#[test]
fn iterative_rounds_are_recorded() {
    let r = run_iterative(&cfg(Preset::ShiftedBlobs, Scenario::Iterative, 1), 3).unwrap();
    assert_eq!(r.rounds.len(), 3);
    assert_eq!(r.config.rounds, 3);
    assert!(r.rounds.iter().all(|x| x.mft_accuracy.is_some()));
    assert_eq!(r.after.accuracy, r.rounds[2].accuracy);
}

#[test]
fn fine_tuning_arms_stay_in_the_envelope() {
    let mut votes = 0;
    for seed in 1..=3 {
        let r = run(&cfg(Preset::ShiftedBlobs, Scenario::MftVsDft, seed)).unwrap();
        let (a, b, c) = (r.before.accuracy, r.mft.as_ref().unwrap().evaluation.accuracy, r.after.accuracy);
        assert!([a, b, c].iter().all(|v| (0.0..=1.0).contains(v)));
        if b >= a - 0.01 && c >= a - 0.01 {
            votes += 1;
        }
    }
    assert!(votes >= 2, "{votes} of 3 seeds");
}

#[test]
fn two_rounds_match_the_best_single_arm() {
    let mut votes = 0;
    for seed in 1..=3 {
        let single = run(&cfg(Preset::ShiftedBlobs, Scenario::MftVsDft, seed)).unwrap();
        let best = single.after.accuracy.max(single.mft.unwrap().evaluation.accuracy);
        let it = run(&cfg(Preset::ShiftedBlobs, Scenario::Iterative, seed)).unwrap();
        assert_eq!(it.rounds.len(), 2);
        if it.after.accuracy >= best - 0.01 {
            votes += 1;
        }
    }
    assert!(votes >= 2, "{votes} of 3 seeds");
}

#[test]
fn toy_brightness_shift_is_recovered() {
    let r = run(&cfg(Preset::ToyBrightness, Scenario::Inter, 1)).unwrap();
    assert!(r.model.source_test_accuracy - r.before.accuracy >= 0.15);
    assert!(r.gain() >= 0.10, "gain {}", r.gain());
    assert!(r.after.overlap.unwrap() < r.before.overlap.unwrap());
    assert!(r.scatter.is_none());
}

#[test]
fn literal_reports_the_squashed_baseline() {
    let mut c = cfg(Preset::ShiftedBlobs, Scenario::Inter, 1);
    c.dft.mode = dfine_core::dft::TransformMode::Literal;
    c.dft.epochs = 1;
    let r = run(&c).unwrap();
    assert_eq!(r.mode, dfine_core::dft::TransformMode::Literal);
    assert_ne!(r.zero_noise, r.before);
    let p = run(&cfg(Preset::ShiftedBlobs, Scenario::Inter, 1)).unwrap();
    assert_eq!(p.zero_noise.accuracy, p.before.accuracy);
}

#[test]
fn model_file_is_left_alone() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    let trained = run(&cfg(Preset::ShiftedBlobs, Scenario::Inter, 2)).unwrap();
    // retrain the same model through the library and save it
    let c = cfg(Preset::ShiftedBlobs, Scenario::Inter, 2).resolved();
    let source = c.source.load(2).unwrap();
    let (train, _, _) = dfine_core::data::split(&source, c.splits, 2).unwrap();
    let mut m = dfine_core::Model::for_dataset(&train, "class", &c.train).unwrap();
    m.train(&train, &c.train).unwrap();
    m.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let mut loaded = c.clone();
    loaded.model.path = Some(path.clone());
    let r = run(&loaded).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(r.model.hash_before, r.model.hash_after);
    assert_eq!(r.model.hash_before, trained.model.hash_before);
    assert_eq!(r.after, trained.after);
    assert!(r.model.training.is_none());
}

#[test]
fn bad_configs_are_validation_errors() {
    let mut c = cfg(Preset::ShiftedBlobs, Scenario::Inter, 1);
    c.dft.learning_rate = -1.0;
    assert!(run(&c).unwrap_err().is_validation());
    let mut c = cfg(Preset::ShiftedBlobs, Scenario::Inter, 1);
    c.target = Some(Target::Shift(ShiftSpec::translate(vec![0.1, 0.2, 0.3])));
    assert!(run(&c).unwrap_err().is_validation());
    assert!(run_iterative(&cfg(Preset::ShiftedBlobs, Scenario::Iterative, 1), 0).unwrap_err().is_validation());
}
