use std::fs;

use dfine_core::data::BlobSpec;
use dfine_harness::config::DataSpec;
use dfine_harness::plots::MANIFEST_FILE;
use dfine_harness::*;

fn svgs(dir: &std::path::Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    names.sort();
    names
}

#[test]
fn two_dimensional_report_gives_three_panels() {
    let r = run(&ExperimentConfig::preset(Preset::ShiftedBlobs, Scenario::Inter, 1)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let manifest = emit_plots(&r, a.path()).unwrap();
    assert_eq!(svgs(a.path()), ["histograms.svg", "roc.svg", "scatter.svg"]);
    assert!(manifest.notices.is_empty());
    let listed: PlotManifest = serde_json::from_str(&fs::read_to_string(a.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(listed, manifest);
    for f in &manifest.files {
        let text = fs::read_to_string(a.path().join(f)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }

    emit_plots(&r, b.path()).unwrap();
    for f in svgs(a.path()).iter().chain([&MANIFEST_FILE.to_string()]) {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn multiclass_report_skips_roc() {
    let mut c = ExperimentConfig::preset(Preset::OverlapBlobs, Scenario::Intra, 1);
    c.source = DataSpec::Blobs(BlobSpec {
        centers: vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]],
        sigmas: vec![0.2; 3],
        counts: vec![300; 3],
    });
    c.dft.epochs = 1;
    let r = run(&c).unwrap();
    assert!(r.before.roc.is_none() && r.after.histogram.is_none());
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_plots(&r, dir.path()).unwrap();
    assert_eq!(manifest.files, ["scatter.svg"]);
    assert!(manifest.notices.iter().any(|n| n.starts_with("roc.svg skipped")));
    assert_eq!(svgs(dir.path()), ["scatter.svg"]);
}

#[test]
fn curves_are_dumped_as_csv() {
    let r = run(&ExperimentConfig::preset(Preset::OverlapBlobs, Scenario::Intra, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_curves(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 5);
    let roc = fs::read_to_string(dir.path().join("roc_after.csv")).unwrap();
    assert_eq!(roc.lines().count(), r.after.roc.as_ref().unwrap().points.len() + 1);
    let trace = fs::read_to_string(dir.path().join("dft_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), r.dft_trace.len() + 1);
}
