//! End-to-end acceptance suite: one pass/fail line per criterion, exit status
//! non-zero if any fails. Run with `cargo test -p dfine-harness --test acceptance`.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dfine_core::data::{one_hot, AttributeSchema, Dataset, SYNTHETIC_ATTRIBUTE};
use dfine_core::dft::{grad_perturbation, objective, transform, Perturbation, TransformMode};
use dfine_core::math::{Rng, Tensor};
use dfine_core::metrics::{accuracy, confusion, roc, roc_from_scores};
use dfine_core::model::{Activation, FeedForwardModel};
use dfine_harness::{run, ExperimentConfig, Preset, Report, Scenario};

const SEEDS: [u64; 3] = [1, 2, 3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn random_tensor(rng: &mut Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.uniform(lo, hi)).collect()).unwrap()
}

fn random_model(rng: &mut Rng, d: usize, classes: usize) -> FeedForwardModel<f64> {
    // tanh hidden units keep the network smooth for finite differences
    let hidden: Vec<usize> = (0..rng.below(3)).map(|_| 2 + rng.below(8)).collect();
    let mut m =
        FeedForwardModel::initialize(SYNTHETIC_ATTRIBUTE, d, classes, &hidden, Activation::Tanh, rng.below(1 << 30) as u64)
            .unwrap();
    m.freeze();
    m
}

fn central_diff(f: impl Fn(&Tensor<f64>) -> f64, x: &Tensor<f64>, i: usize) -> f64 {
    let h = 1e-5;
    let (mut p, mut m) = (x.clone(), x.clone());
    p.as_mut_slice()[i] += h;
    m.as_mut_slice()[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

fn gradients() -> Outcome {
    let mut rng = Rng::new(2024);
    let (mut worst, mut instances) = (0.0f64, 0);
    for case in 0..24 {
        let d = 1 + rng.below(10);
        let m = 1 + rng.below(8);
        let classes = 2 + rng.below(2);
        let model = random_model(&mut rng, d, classes);
        let mode = if case % 2 == 0 { TransformMode::Literal } else { TransformMode::Preimage };
        let lambda = ((case / 2) % 2) as f64;
        let x = random_tensor(&mut rng, &[m, d], 0.0, 1.0);
        let labels: Vec<usize> = (0..m).map(|_| rng.below(classes)).collect();
        let y = one_hot(&labels, classes).unwrap();

        let upstream = random_tensor(&mut rng, &[m, classes], -1.0, 1.0);
        let gi = model.grad_input(&x, &upstream).unwrap();
        let f = |xx: &Tensor<f64>| {
            let s = model.forward(xx).unwrap();
            s.as_slice().iter().zip(upstream.as_slice()).map(|(a, b)| a * b).sum::<f64>()
        };
        for i in 0..m * d {
            worst = worst.max(rel_err(gi.as_slice()[i], central_diff(f, &x, i)));
        }

        let noise: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let p = Perturbation::new(noise, mode, 1e-6).unwrap();
        let g = grad_perturbation(&model, &x, &y, &p, lambda).unwrap();
        let f = |n: &Tensor<f64>| {
            let q = Perturbation::new(n.as_slice().to_vec(), mode, 1e-6).unwrap();
            objective(&model, &x, &y, &q, lambda).unwrap()
        };
        for i in 0..d {
            worst = worst.max(rel_err(g.as_slice()[i], central_diff(f, &p.noise, i)));
        }
        instances += 1;
    }
    check(worst < 1e-4, format!("{instances} instances, both modes, lambda 0/1; worst relative error {worst:.2e}"))
}

fn range() -> Outcome {
    let mut rng = Rng::new(7);
    let mut bad = 0;
    for k in 0..10_000 {
        let d = 1 + rng.below(16);
        let mode = if k % 2 == 0 { TransformMode::Literal } else { TransformMode::Preimage };
        let x: Vec<f64> = (0..d)
            .map(|_| match rng.below(10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.uniform(0.0, 1.0),
            })
            .collect();
        let scale = [1.0, 10.0, 100.0][rng.below(3)];
        let noise: Vec<f64> = (0..d).map(|_| rng.uniform(-scale, scale)).collect();
        let z = transform(&Tensor::new(vec![1, d], x).unwrap(), &Perturbation::new(noise, mode, 1e-6).unwrap()).unwrap();
        bad += z.as_slice().iter().filter(|&&v| !(v > 0.0 && v < 1.0)).count();
    }
    check(bad == 0, format!("10000 (X, N) pairs, |N| up to 100; {bad} entries outside (0,1)"))
}

fn identity(inter: &[Report]) -> Outcome {
    let mut rng = Rng::new(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = 1 + rng.below(16);
        let x: Vec<f64> = (0..d)
            .map(|_| match rng.below(10) {
                0 => 1e-5,
                1 => 1.0 - 1e-5,
                _ => rng.uniform(1e-5, 1.0 - 1e-5),
            })
            .collect();
        let xt = Tensor::new(vec![1, d], x).unwrap();
        let z = transform(&xt, &Perturbation::zeros(d, TransformMode::Preimage)).unwrap();
        worst = worst.max(z.max_abs_diff(&xt).unwrap());
    }
    let same = inter.iter().all(|r| r.zero_noise.accuracy == r.before.accuracy && r.zero_noise.confusion == r.before.confusion);
    check(
        worst < 1e-5 && same,
        format!("max |transform(X,0) - X| = {worst:.2e}; zero-noise accuracy equals raw accuracy: {same}"),
    )
}

fn inter_gain(inter: &[Report]) -> Outcome {
    let mut pass = true;
    let parts: Vec<String> = inter
        .iter()
        .map(|r| {
            let ok = r.model.source_test_accuracy >= 0.95 && r.before.accuracy <= 0.70 && r.gain() >= 0.10;
            pass &= ok;
            format!(
                "seed {}: source {:.1}%, shifted {:.1}% -> {:.1}% ({:+.1})",
                r.seed,
                100.0 * r.model.source_test_accuracy,
                100.0 * r.before.accuracy,
                100.0 * r.after.accuracy,
                100.0 * r.gain()
            )
        })
        .collect();
    check(pass, parts.join("; "))
}

fn intra(reports: &[Report]) -> Outcome {
    let no_harm = reports.iter().all(|r| r.gain() >= -0.005);
    let gains = reports.iter().filter(|r| r.gain() >= 0.01).count();
    let parts: Vec<String> =
        reports.iter().map(|r| format!("seed {}: {:.2}% -> {:.2}%", r.seed, 100.0 * r.before.accuracy, 100.0 * r.after.accuracy)).collect();
    check(no_harm && gains >= 2, format!("{}; no harm: {no_harm}, +1 point in {gains}/3", parts.join("; ")))
}

fn separation(inter: &[Report]) -> Outcome {
    let mut votes = 0;
    let parts: Vec<String> = inter
        .iter()
        .map(|r| {
            let (b, a) = (&r.before, &r.after);
            let ok = a.tpr >= b.tpr && a.tnr >= b.tnr && a.overlap < b.overlap;
            votes += usize::from(ok);
            format!(
                "seed {}: TPR {:.1}->{:.1}, TNR {:.1}->{:.1}, overlap {:.3}->{:.3}",
                r.seed,
                100.0 * b.tpr.unwrap(),
                100.0 * a.tpr.unwrap(),
                100.0 * b.tnr.unwrap(),
                100.0 * a.tnr.unwrap(),
                b.overlap.unwrap(),
                a.overlap.unwrap()
            )
        })
        .collect();
    check(votes >= 2, format!("{}; {votes}/3 seeds", parts.join("; ")))
}

fn metric_oracles() -> Outcome {
    let mut rng = Rng::new(99);
    let (mut mismatches, mut worst_auc) = (0, 0.0f64);
    for case in 0..200 {
        let m = 2 + rng.below(49);
        let d = 1 + rng.below(5);
        let classes = if case % 4 == 0 { 3 } else { 2 };
        let model = random_model(&mut rng, d, classes);
        let mut labels: Vec<usize> = (0..m).map(|_| rng.below(classes)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let x = random_tensor(&mut rng, &[m, d], 0.0, 1.0);
        let data = Dataset::new(x.clone(), vec![labels.clone()], AttributeSchema::binary(SYNTHETIC_ATTRIBUTE));
        let data = match classes {
            2 => data.unwrap(),
            _ => Dataset::new(
                x.clone(),
                vec![labels.clone()],
                AttributeSchema::new(vec![dfine_core::data::Attribute { name: SYNTHETIC_ATTRIBUTE.into(), classes }]).unwrap(),
            )
            .unwrap(),
        };

        let scores = model.forward(&x).unwrap();
        let mut counts = vec![vec![0u64; classes]; classes];
        let mut hits = 0;
        for k in 0..m {
            let row = scores.row(k);
            let mut best = 0;
            for c in 1..classes {
                if row[c] > row[best] {
                    best = c;
                }
            }
            hits += usize::from(best == labels[k]);
            counts[labels[k]][best] += 1;
        }
        if accuracy(&model, &data).unwrap() != hits as f64 / m as f64 || confusion(&model, &data).unwrap().counts != counts {
            mismatches += 1;
        }

        // AUC from model scores and from tie-heavy quantised scores
        let positive: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
        let mut pairs = vec![];
        if classes == 2 {
            let s: Vec<f64> = (0..m).map(|k| scores.row(k)[1]).collect();
            pairs.push((roc(&model, &data, 1).unwrap().auc, s));
        }
        let q: Vec<f64> = (0..m).map(|_| rng.below(5) as f64 / 4.0).collect();
        pairs.push((roc_from_scores(&q, &positive).unwrap().auc, q));
        for (auc, s) in pairs {
            let (mut wins, mut total) = (0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    if positive[i] && !positive[j] {
                        total += 1.0;
                        wins += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                    }
                }
            }
            worst_auc = worst_auc.max((auc - wins / total).abs());
        }
    }
    check(
        mismatches == 0 && worst_auc <= 1e-12,
        format!("200 instances, m <= 50; accuracy/confusion mismatches {mismatches}, worst AUC deviation {worst_auc:.1e}"),
    )
}

fn integrity(all: &[&Report]) -> Outcome {
    let unchanged = all.iter().all(|r| r.model.hash_before == r.model.hash_after);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    let mut rng = Rng::new(5);
    let model = random_model(&mut rng, 2, 2);
    model.save(&path).unwrap();
    let bytes = fs::read(&path).unwrap();
    let mut cfg = ExperimentConfig::preset(Preset::ShiftedBlobs, Scenario::MftVsDft, 1);
    cfg.model.path = Some(path.clone());
    let r = run(&cfg).unwrap();
    let file_ok = fs::read(&path).unwrap() == bytes && r.model.hash_before == r.model.hash_after;

    let data = Dataset::new(
        random_tensor(&mut rng, &[40, 2], 0.0, 1.0),
        vec![(0..40).map(|k| k % 2).collect()],
        AttributeSchema::binary(SYNTHETIC_ATTRIBUTE),
    )
    .unwrap();
    let (tuned, _) = model.fine_tune(&data, &Default::default()).unwrap();
    let mft_ok = model.to_bytes() == bytes && tuned.to_bytes() != bytes && r.mft.as_ref().unwrap().model_hash != r.model.hash_before;
    check(
        unchanged && file_ok && mft_ok,
        format!(
            "{} scenario reports with unchanged hash: {unchanged}; model file untouched: {file_ok}; fine-tuned copy distinct, original intact: {mft_ok}",
            all.len() + 1
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let go = |sub: &str| {
        Command::new(env!("CARGO_BIN_EXE_dfine"))
            .args(["experiment", "mft-vs-dft", "--seed", "2", "--run-dir", sub])
            .current_dir(dir.path())
            .output()
            .unwrap()
            .status
            .success()
    };
    let ran = go("a") && go("b");
    let same = |f: &str| fs::read(dir.path().join("a").join(f)).ok() == fs::read(dir.path().join("b").join(f)).ok();
    let files = ["report.json", "config.json", "perturbation.bin", "plots/roc.svg", "plots/histograms.svg", "plots/scatter.svg"];
    let identical = ran && files.iter().all(|f| same(f));
    check(identical, format!("two `dfine experiment mft-vs-dft --seed 2` runs; report, noise and plots byte-identical: {identical}"))
}

fn visual_control(inter: &[Report]) -> Outcome {
    let mut votes = 0;
    let parts: Vec<String> = inter
        .iter()
        .map(|r| {
            let mut cfg = r.config.clone();
            cfg.dft.lambda = 10.0;
            let heavy = run(&cfg).unwrap();
            cfg.dft.lambda = 0.0;
            let none = run(&cfg).unwrap();
            let (h, z) = (heavy.distance.mean_abs_diff, none.distance.mean_abs_diff);
            votes += usize::from(h < z);
            format!("seed {}: {h:.4} vs {z:.4}", r.seed)
        })
        .collect();
    check(votes >= 2, format!("mean |X-Z| lambda=10 vs lambda=0: {}; {votes}/3 seeds", parts.join(", ")))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, (o, took): (Outcome, Duration), budget: Duration| {
        let ok = o.pass && took <= budget;
        failed += usize::from(!ok);
        let verdict = if ok { "PASS" } else { "FAIL" };
        let over = if took > budget { format!(", over the {}s budget", budget.as_secs()) } else { String::new() };
        println!("[{verdict}] {id:>2}. {name}: {} ({:.1}s{over})", o.detail, took.as_secs_f64());
    };
    let secs = Duration::from_secs;

    report(1, "gradient correctness", timed(gradients), secs(10));
    report(2, "range constraint", timed(range), secs(5));

    let (inter, inter_time): (Vec<Report>, _) = timed(|| {
        SEEDS.iter().map(|&s| run(&ExperimentConfig::preset(Preset::ShiftedBlobs, Scenario::Inter, s)).unwrap()).collect()
    });
    report(3, "identity at zero noise", timed(|| identity(&inter)), secs(1));
    let (o, t) = timed(|| inter_gain(&inter));
    report(4, "inter-dataset gain on shifted blobs", (o, t + inter_time), secs(60));

    let (intra_reports, intra_time): (Vec<Report>, _) = timed(|| {
        SEEDS.iter().map(|&s| run(&ExperimentConfig::preset(Preset::OverlapBlobs, Scenario::Intra, s)).unwrap()).collect()
    });
    let (o, t) = timed(|| intra(&intra_reports));
    report(5, "intra-dataset no harm and gain", (o, t + intra_time), secs(60));
    report(6, "TPR/TNR and score separation", timed(|| separation(&inter)), secs(60));
    report(7, "metric oracles", timed(metric_oracles), secs(5));
    let all: Vec<&Report> = inter.iter().chain(&intra_reports).collect();
    report(8, "frozen-model integrity", timed(|| integrity(&all)), secs(5));
    report(9, "CLI determinism", timed(cli_determinism), secs(120));
    report(10, "visual-preservation control", timed(|| visual_control(&inter)), secs(120));

    if failed == 0 {
        println!("all 10 acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
