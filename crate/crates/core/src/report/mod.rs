//! Writes the analysis bundle as canonical JSON, flat CSV tables and SVG
//! charts.

pub mod check;
pub mod json;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use crate::model::Condition;
use crate::pipeline::{AnalysisBundle, TestOutcome};
use crate::{Error, Result};

pub use check::check_svg;
pub use json::{canonical_string, format_float, round_sig12, to_canonical_json};
pub use svg::{render, Chart};

pub const ANALYSIS_FILE: &str = "analysis.json";

fn f(x: f64) -> String {
    format_float(x)
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| csv_io(path, e))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("checked io error"),
        }
    } else {
        Error::Csv(e)
    }
}

fn per_question_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&[
        "question_id",
        "dataset_tag",
        "condition",
        "responders",
        "abstain",
        "entropy",
        "majority_fraction",
        "modal_option",
        "correct_option",
        "majority_correct",
        "correct_count",
        "robustness",
        "robustness_bin",
    ]);
    for row in &b.per_question {
        for cond in Condition::ALL {
            let Some(o) = row.get(cond) else { continue };
            t.push(vec![
                o.question_id.clone(),
                row.dataset_tag.clone(),
                cond.to_string(),
                o.distribution.responders.to_string(),
                o.distribution.abstain_count.to_string(),
                f(o.entropy),
                f(o.majority_fraction),
                o.modal_option.clone(),
                o.correct_option.clone(),
                o.majority_correct.to_string(),
                o.correct_count.to_string(),
                f(o.robustness),
                o.robustness_bin.as_str().to_string(),
            ]);
        }
    }
    t
}

fn paired_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&["question_id", "metric", "zero_shot", "agentic", "delta", "shift"]);
    for metric in crate::metrics::Metric::ALL {
        for d in &b.paired.get(metric).deltas {
            t.push(vec![
                d.question_id.clone(),
                metric.symbol().to_string(),
                f(d.zero_shot),
                f(d.agentic),
                f(d.delta),
                serde_plain(&d.shift),
            ]);
        }
    }
    t
}

fn serde_plain<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn transitions_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&["question_id", "zero_shot_bin", "agentic_bin", "label"]);
    for tr in &b.transitions.robustness_bins.transitions {
        t.push(vec![
            tr.question_id.clone(),
            tr.zero_shot.as_str().to_string(),
            tr.agentic.as_str().to_string(),
            serde_plain(&tr.label),
        ]);
    }
    t
}

fn anomalies_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&[
        "question_id",
        "condition",
        "majority_fraction",
        "robustness",
        "modal_option",
        "correct_option",
    ]);
    for a in &b.anomalies {
        t.push(vec![
            a.question_id.clone(),
            a.condition.to_string(),
            f(a.majority_fraction),
            f(a.robustness),
            a.modal_option.clone(),
            a.correct_option.clone(),
        ]);
    }
    t
}

fn severity_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&["subset", "condition", "low", "moderate", "high", "unannotated"]);
    for r in b.severity.iter().flat_map(|s| &s.crosstab) {
        t.push(vec![
            r.subset.as_str().to_string(),
            r.condition.to_string(),
            r.low.to_string(),
            r.moderate.to_string(),
            r.high.to_string(),
            r.unannotated.to_string(),
        ]);
    }
    t
}

fn per_model_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&[
        "model_id",
        "questions",
        "zero_shot_accuracy",
        "zero_shot_mean",
        "zero_shot_sd",
        "zero_shot_ci_low",
        "zero_shot_ci_high",
        "agentic_accuracy",
        "agentic_mean",
        "agentic_sd",
        "agentic_ci_low",
        "agentic_ci_high",
        "discordant_zero_shot",
        "discordant_agentic",
        "mcnemar_p",
        "mcnemar_p_fdr",
        "degenerate",
    ]);
    for m in &b.per_model {
        let ci =
            |c: &crate::stats::BootstrapCI<f64>| [f(c.point_estimate), f(c.mean), f(c.sd), f(c.ci_low), f(c.ci_high)];
        let mut row = vec![m.model_id.clone(), m.questions.to_string()];
        row.extend(ci(&m.zero_shot));
        row.extend(ci(&m.agentic));
        row.extend([
            m.discordant_zero_shot.to_string(),
            m.discordant_agentic.to_string(),
            f(m.mcnemar.p_two_sided),
            f(m.p_adjusted),
            m.mcnemar.degenerate.to_string(),
        ]);
        t.push(row);
    }
    t
}

fn tests_table(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(&[
        "id",
        "status",
        "statistic",
        "p_two_sided",
        "effect_size",
        "n_used",
        "n_excluded",
        "approximation",
        "note",
    ]);
    for e in &b.tests {
        let row = match &e.outcome {
            TestOutcome::Computed { result: r } => vec![
                e.id.clone(),
                "computed".into(),
                f(r.statistic),
                f(r.p_two_sided),
                f(r.effect_size),
                r.n_used.to_string(),
                r.n_excluded.to_string(),
                serde_plain(&r.approximation),
                String::new(),
            ],
            TestOutcome::Skipped { reason } => {
                let mut v = vec![e.id.clone(), "skipped".into()];
                v.extend(std::iter::repeat_n(String::new(), 6));
                v.push(reason.clone());
                v
            }
        };
        t.push(row);
    }
    t
}

/// Table file names in the order they are written.
pub const CSV_FILES: [&str; 7] = [
    "per_question.csv",
    "paired_deltas.csv",
    "transitions.csv",
    "anomalies.csv",
    "severity_crosstab.csv",
    "per_model.csv",
    "tests.csv",
];

/// Writes `analysis.json` and every CSV table into `out_dir`, creating it
/// if needed. Returns the written paths.
pub fn emit_analysis(bundle: &AnalysisBundle, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let json_path = dir.join(ANALYSIS_FILE);
    fs::write(&json_path, to_canonical_json(bundle)?).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);
    let tables = [
        per_question_table(bundle),
        paired_table(bundle),
        transitions_table(bundle),
        anomalies_table(bundle),
        severity_table(bundle),
        per_model_table(bundle),
        tests_table(bundle),
    ];
    for (name, table) in CSV_FILES.iter().zip(&tables) {
        let path = dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_analysis(path: impl AsRef<Path>) -> Result<AnalysisBundle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn emit_svg(bundle: &AnalysisBundle, chart: Chart, out_path: impl AsRef<Path>) -> Result<()> {
    let path = out_path.as_ref();
    let svg = render(bundle, chart)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Renders every chart the bundle has data for into `dir`; charts with
/// nothing to plot are skipped and reported by name.
pub fn emit_all_svg(bundle: &AnalysisBundle, dir: impl AsRef<Path>) -> Result<(Vec<PathBuf>, Vec<&'static str>)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mut written, mut skipped) = (Vec::new(), Vec::new());
    for chart in Chart::ALL {
        let path = dir.join(format!("{}.svg", chart.as_str()));
        match emit_svg(bundle, chart, &path) {
            Ok(()) => written.push(path),
            Err(Error::NothingToPlot) => skipped.push(chart.as_str()),
            Err(e) => return Err(e),
        }
    }
    Ok((written, skipped))
}
