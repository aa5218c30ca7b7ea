//! Self-contained SVG panels and CSV dumps rendered from a [`Report`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dfine_core::metrics::{RocCurve, ScoreHistogram};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::report::{Report, Scatter};

pub const MANIFEST_FILE: &str = "manifest.json";

const W: f64 = 420.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;
const BEFORE: &str = "#4c72b0";
const AFTER: &str = "#dd8452";
const CLASS_FILL: [&str; 4] = ["#dbe6f5", "#f8e0cf", "#d8eed8", "#eedcee"];
const CLASS_INK: [&str; 4] = ["#2b5797", "#c0504d", "#3a8a3a", "#8a3a8a"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotManifest {
    pub files: Vec<String>,
    pub notices: Vec<String>,
}

/// Writes the SVG panels the report supports plus `manifest.json` listing
/// them. Output depends only on the report.
pub fn emit_plots(report: &Report, dir: &Path) -> Result<PlotManifest> {
    fs::create_dir_all(dir)?;
    let mut manifest = PlotManifest { files: Vec::new(), notices: Vec::new() };
    let mut write = |name: &str, svg: String| -> Result<()> {
        fs::write(dir.join(name), svg)?;
        manifest.files.push(name.to_string());
        Ok(())
    };

    match (&report.before.roc, &report.after.roc) {
        (Some(b), Some(a)) => write("roc.svg", roc_svg(b, a))?,
        _ => manifest.notices.push(format!(
            "roc.svg skipped: attribute '{}' has {} classes, ROC needs 2",
            report.model.attribute, report.model.classes
        )),
    }
    match (&report.before.histogram, &report.after.histogram) {
        (Some(b), Some(a)) => write("histograms.svg", histograms_svg(b, a))?,
        _ => manifest.notices.push("histograms.svg skipped: score histograms need a binary attribute".into()),
    }
    match &report.scatter {
        Some(s) => write("scatter.svg", scatter_svg(s))?,
        None => manifest
            .notices
            .push(format!("scatter.svg skipped: {}-dimensional inputs, scatter needs 2", report.model.input_dim)),
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(manifest)
}

/// Dumps ROC points, histogram counts and the DFT trace as CSV files.
pub fn write_curves(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (tag, e) in [("before", &report.before), ("after", &report.after)] {
        if let Some(roc) = &e.roc {
            let path = dir.join(format!("roc_{tag}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["threshold", "fpr", "tpr"])?;
            for p in &roc.points {
                w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
            }
            w.flush()?;
            written.push(path);
        }
        if let Some(h) = &e.histogram {
            let path = dir.join(format!("histogram_{tag}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["bin_low", "bin_high", "positive", "negative"])?;
            let edges = h.bin_edges();
            for b in 0..h.bins {
                w.write_record([
                    edges[b].to_string(),
                    edges[b + 1].to_string(),
                    h.positive[b].to_string(),
                    h.negative[b].to_string(),
                ])?;
            }
            w.flush()?;
            written.push(path);
        }
    }
    let path = dir.join("dft_trace.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["step", "objective"])?;
    for (i, v) in report.dft_trace.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}

/// Maps unit-square data coordinates into a panel offset by `dx`.
struct Panel {
    dx: f64,
    ymax: f64,
}

impl Panel {
    fn x(&self, v: f64) -> f64 {
        self.dx + MARGIN + v * (W - 1.5 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        H - MARGIN - v / self.ymax * (H - 1.5 * MARGIN)
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (self.x(0.0), self.x(1.0), self.y(0.0), self.y(self.ymax));
        let _ = writeln!(out, r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##, x1 - x0, y0 - y1);
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let (tx, ty) = (self.x(t), self.y(t * self.ymax));
            let _ = writeln!(out, r##"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"##, y0 + 14.0);
            let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.2}</text>"##, x0 - 4.0, ty + 4.0, t * self.ymax);
        }
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{title}</text>"##, (x0 + x1) / 2.0, y1 - 8.0);
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"##, (x0 + x1) / 2.0, y0 + 32.0);
        let _ = writeln!(
            out,
            r##"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{ylabel}</text>"##,
            self.dx + 12.0,
            (y0 + y1) / 2.0
        );
    }
}

fn svg(width: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{H:.0}\" viewBox=\"0 0 {width:.0} {H:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, colour: &str, extra: &str) -> String {
    let pts: Vec<String> = points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!("<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"{extra}/>\n", pts.join(" "))
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(&str, String)]) {
    for (i, (colour, label)) in entries.iter().enumerate() {
        let yy = y + 16.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{x:.2}" y="{:.2}" width="12" height="8" fill="{colour}"/>"#, yy - 8.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{yy:.2}">{label}</text>"#, x + 16.0);
    }
}

fn roc_svg(before: &RocCurve, after: &RocCurve) -> String {
    let p = Panel { dx: 0.0, ymax: 1.0 };
    let mut out = String::new();
    p.frame(&mut out, "ROC before and after data fine-tuning", "false positive rate", "true positive rate");
    out += &polyline([(0.0, 0.0), (1.0, 1.0)].into_iter().map(|(a, b)| (p.x(a), p.y(b))), "#999", " stroke-dasharray=\"4 4\"");
    for (curve, colour) in [(before, BEFORE), (after, AFTER)] {
        out += &polyline(curve.points.iter().map(|q| (p.x(q.fpr), p.y(q.tpr))), colour, "");
    }
    legend(
        &mut out,
        p.x(0.45),
        p.y(0.2),
        &[(BEFORE, format!("before (AUC {:.4})", before.auc)), (AFTER, format!("after (AUC {:.4})", after.auc))],
    );
    svg(W, &out)
}

fn histograms_svg(before: &ScoreHistogram, after: &ScoreHistogram) -> String {
    let norm = |c: &[u64]| {
        let n = c.iter().sum::<u64>().max(1) as f64;
        c.iter().map(|&v| v as f64 / n).collect::<Vec<_>>()
    };
    let peak = [before, after]
        .iter()
        .flat_map(|h| norm(&h.positive).into_iter().chain(norm(&h.negative)))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let mut out = String::new();
    for (i, (h, title)) in [(before, "before"), (after, "after")].into_iter().enumerate() {
        let p = Panel { dx: i as f64 * W, ymax: peak };
        p.frame(
            &mut out,
            &format!("Positive-class score, {title} (overlap {:.3})", h.overlap()),
            "score",
            "fraction of class",
        );
        let edges = h.bin_edges();
        for (counts, ink) in [(norm(&h.negative), CLASS_INK[0]), (norm(&h.positive), CLASS_INK[1])] {
            for (b, &v) in counts.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let (x0, x1, y) = (p.x(edges[b]), p.x(edges[b + 1]), p.y(v));
                let _ = writeln!(
                    out,
                    r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{ink}" fill-opacity="0.45" stroke="{ink}"/>"#,
                    x1 - x0,
                    p.y(0.0) - y
                );
            }
        }
        legend(
            &mut out,
            p.x(0.35),
            p.y(peak) + 16.0,
            &[(CLASS_INK[0], "negative class".into()), (CLASS_INK[1], "positive class".into())],
        );
    }
    svg(2.0 * W, &out)
}

fn scatter_svg(s: &Scatter) -> String {
    let mut out = String::new();
    let g = s.grid_size;
    for (i, panel_title) in ["Original samples X", "Fine-tuned samples Z"].into_iter().enumerate() {
        let p = Panel { dx: i as f64 * W, ymax: 1.0 };
        let cell = 1.0 / (g - 1) as f64;
        for r in 0..g {
            for c in 0..g {
                let class = s.grid[r * g + c];
                let (cx, cy) = (c as f64 * cell, r as f64 * cell);
                let (x0, x1) = (p.x((cx - cell / 2.0).max(0.0)), p.x((cx + cell / 2.0).min(1.0)));
                let (y0, y1) = (p.y((cy + cell / 2.0).min(1.0)), p.y((cy - cell / 2.0).max(0.0)));
                let _ = writeln!(
                    out,
                    r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    x1 - x0,
                    y1 - y0,
                    CLASS_FILL[class % CLASS_FILL.len()]
                );
            }
        }
        let pts = if i == 0 { &s.x } else { &s.z };
        for (q, &label) in pts.iter().zip(&s.labels) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{}"/>"#,
                p.x(q[0]),
                p.y(q[1]),
                CLASS_INK[label % CLASS_INK.len()]
            );
        }
        p.frame(&mut out, panel_title, "x0", "x1");
    }
    svg(2.0 * W, &out)
}
