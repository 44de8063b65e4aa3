//! Result tables (CSV) and accuracy-vs-k curves (SVG).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::grid::ExperimentRecord;
use crate::classify::ClassifierSpec;
use crate::ngram::NGramSpec;
use crate::select::{SelectorConfig, SelectorMethod};

pub const CSV_COLUMNS: [&str; 8] = [
    "profile",
    "selector",
    "classifier",
    "k",
    "accuracy",
    "wall_time_s",
    "seed",
    "error",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to report")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("results row {row}: {reason}")]
    Parse { row: usize, reason: String },
}

fn comment_block(preamble: &[String], open: &str, close: &str) -> String {
    preamble
        .iter()
        .map(|line| format!("{open}{line}{close}\n"))
        .collect()
}

/// CSV text: optional `# ` comment lines, a header row, one row per record.
/// Floats use the shortest representation that parses back exactly.
pub fn emit_results_csv(records: &[ExperimentRecord], preamble: &[String]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.ngram_profile.label(),
            r.selector.describe(),
            r.classifier.describe(),
            r.k.to_string(),
            r.accuracy.map_or(String::new(), |a| a.to_string()),
            r.wall_time.map_or(String::new(), |t| t.to_string()),
            r.seed.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8");
    Ok(comment_block(preamble, "# ", "") + &body)
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ExperimentRecord>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(ReportError::Parse {
            row: 0,
            reason: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |reason: String| ReportError::Parse { row: i + 1, reason };
        let opt_f64 = |s: &str| -> Result<Option<f64>, ReportError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(format!("bad number `{s}`")))
            }
        };
        let seed: u64 = row[6].parse().map_err(|_| bad(format!("bad seed `{}`", &row[6])))?;
        out.push(ExperimentRecord {
            ngram_profile: row[0].parse::<NGramSpec>().map_err(|e| bad(e.to_string()))?,
            selector: SelectorConfig::parse_description(&row[1], seed).map_err(|e| bad(e.to_string()))?,
            classifier: ClassifierSpec::parse_description(&row[2], seed).map_err(|e| bad(e.to_string()))?,
            k: row[3].parse().map_err(|_| bad(format!("bad k `{}`", &row[3])))?,
            accuracy: opt_f64(&row[4])?,
            wall_time: opt_f64(&row[5])?,
            seed,
            error: (!row[7].is_empty()).then(|| row[7].to_string()),
        });
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 340.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const LEGEND_W: f64 = 300.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn dash(method: SelectorMethod) -> &'static str {
    match method {
        SelectorMethod::TopK => "",
        SelectorMethod::ForwardSelection => " stroke-dasharray=\"8 4\"",
        SelectorMethod::RecursiveElimination => " stroke-dasharray=\"2 3\"",
    }
}

/// Standalone SVG: one panel per n-gram profile, one polyline per
/// (selector, classifier) over the requested k. Failed cells are left out.
pub fn emit_curves_svg(records: &[ExperimentRecord], preamble: &[String]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut profiles: Vec<String> = Vec::new();
    let mut classifiers: Vec<String> = Vec::new();
    let mut series: BTreeMap<(usize, SelectorMethod, usize), Vec<(usize, f64)>> = BTreeMap::new();
    let mut ks: Vec<usize> = Vec::new();
    for r in records {
        let label = r.ngram_profile.label();
        let p = profiles.iter().position(|x| *x == label).unwrap_or_else(|| {
            profiles.push(label);
            profiles.len() - 1
        });
        let desc = r.classifier.describe();
        let c = classifiers.iter().position(|x| *x == desc).unwrap_or_else(|| {
            classifiers.push(desc);
            classifiers.len() - 1
        });
        ks.push(r.k);
        let line = series.entry((p, r.selector.method, c)).or_default();
        if let Some(a) = r.accuracy {
            line.push((r.k, a));
        }
    }
    ks.sort_unstable();
    ks.dedup();
    let (k_lo, k_hi) = (ks[0] as f64, ks[ks.len() - 1] as f64);
    let span = if k_hi > k_lo { k_hi - k_lo } else { 1.0 };
    let plot_w = PANEL_W - LEFT - RIGHT;
    let plot_h = PANEL_H - TOP - BOTTOM;
    let width = PANEL_W * profiles.len() as f64 + LEGEND_W;

    let mut out = String::new();
    for line in preamble {
        let _ = writeln!(out, "<!-- {} -->", line.replace("--", "- -"));
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{PANEL_H:.0}\" viewBox=\"0 0 {width:.0} {PANEL_H:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (p, label) in profiles.iter().enumerate() {
        let ox = PANEL_W * p as f64;
        let x = |k: f64| ox + LEFT + (k - k_lo) / span * plot_w;
        let y = |a: f64| TOP + (1.0 - a) * plot_h;
        let _ = writeln!(out, "<g>");
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            ox + LEFT + plot_w / 2.0,
            escape(label)
        );
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{TOP:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" fill=\"none\" stroke=\"black\"/>",
            ox + LEFT
        );
        for i in 0..=5 {
            let a = i as f64 / 5.0;
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{a:.1}</text>",
                ox + LEFT,
                y(a),
                ox + LEFT + plot_w,
                y(a),
                ox + LEFT - 6.0,
                y(a) + 4.0
            );
        }
        for &k in &ks {
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{k}</text>",
                x(k as f64),
                TOP + plot_h + 16.0
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">Number of features selected</text>",
            ox + LEFT + plot_w / 2.0,
            PANEL_H - 16.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">Accuracy</text>",
            ox + 16.0,
            TOP + plot_h / 2.0,
            ox + 16.0,
            TOP + plot_h / 2.0
        );
        for ((sp, method, c), points) in &series {
            if *sp != p || points.is_empty() {
                continue;
            }
            let mut pts = points.clone();
            pts.sort_by_key(|&(k, _)| k);
            let coords: Vec<String> = pts
                .iter()
                .map(|&(k, a)| format!("{:.2},{:.2}", x(k as f64), y(a)))
                .collect();
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"><title>{} / {}</title></polyline>",
                COLORS[c % COLORS.len()],
                dash(*method),
                coords.join(" "),
                method,
                escape(&classifiers[*c])
            );
        }
        let _ = writeln!(out, "</g>");
    }

    let lx = PANEL_W * profiles.len() as f64 + 10.0;
    let mut row = 0;
    let _ = writeln!(out, "<g>");
    for method in SelectorMethod::ALL {
        for (c, desc) in classifiers.iter().enumerate() {
            if !series.keys().any(|&(_, m, sc)| m == method && sc == c) {
                continue;
            }
            let ly = TOP + 18.0 * row as f64;
            let _ = writeln!(
                out,
                "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"2\"{}/><text x=\"{:.2}\" y=\"{:.2}\">{} / {}</text>",
                lx + 30.0,
                COLORS[c % COLORS.len()],
                dash(method),
                lx + 36.0,
                ly + 4.0,
                method,
                escape(desc)
            );
            row += 1;
        }
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Write `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Emit and write the CSV; nothing is written when `records` is empty.
pub fn write_results_csv(records: &[ExperimentRecord], path: &Path, preamble: &[String]) -> Result<(), ReportError> {
    write_text(path, &emit_results_csv(records, preamble)?)
}

/// Emit and write the SVG; nothing is written when `records` is empty.
pub fn write_curves_svg(records: &[ExperimentRecord], path: &Path, preamble: &[String]) -> Result<(), ReportError> {
    write_text(path, &emit_curves_svg(records, preamble)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, accuracy: Option<f64>) -> ExperimentRecord {
        let mut selector = SelectorConfig::new(SelectorMethod::ForwardSelection, k);
        selector.seed = 77;
        let mut classifier = ClassifierSpec::logistic_regression();
        classifier.seed = 77;
        ExperimentRecord {
            ngram_profile: NGramSpec::single(3).unwrap(),
            selector,
            classifier,
            k,
            accuracy,
            wall_time: None,
            seed: 77,
            error: accuracy.is_none().then(|| "failed, badly \"here\"".to_string()),
        }
    }

    #[test]
    fn two_records_three_lines() {
        let csv = emit_results_csv(&[record(50, Some(0.5)), record(150, Some(0.625))], &[]).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("profile,selector,classifier,k,accuracy,wall_time_s,seed,error\n"));
    }

    #[test]
    fn empty_is_an_error_and_writes_nothing() {
        assert!(matches!(emit_results_csv(&[], &[]), Err(ReportError::Empty)));
        assert!(matches!(emit_curves_svg(&[], &[]), Err(ReportError::Empty)));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(write_results_csv(&[], &path, &[]).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn csv_round_trip() {
        let mut timed = record(250, Some(1.0 / 3.0));
        timed.wall_time = Some(0.1 + 0.2);
        let records = vec![record(50, Some(0.1)), timed, record(350, None)];
        let text = emit_results_csv(&records, &["config seed=42".to_string()]).unwrap();
        assert!(text.starts_with("# config seed=42\n"));
        assert_eq!(parse_results_csv(&text).unwrap(), records);
    }

    #[test]
    fn svg_has_axes_and_one_line_per_series() {
        let mut other = record(50, Some(0.4));
        other.classifier = ClassifierSpec::naive_bayes();
        let svg = emit_curves_svg(&[record(50, Some(0.5)), record(150, Some(0.6)), other], &["a -- b".into()]).unwrap();
        assert!(svg.starts_with("<!-- a - - b -->\n<svg"));
        assert!(svg.contains("Number of features selected"));
        assert!(svg.contains(">Accuracy<"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("href"));
    }
}
