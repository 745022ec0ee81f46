//! Deterministic standalone SVG charts.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::metrics::RobustnessBin;
use crate::model::Condition;
use crate::pipeline::AnalysisBundle;
use crate::severity::{ConditionStratum, POOLED};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    DeltaHistogram,
    MrScatter,
    BinBars,
    SeverityBars,
}

impl Chart {
    pub const ALL: [Chart; 4] = [
        Chart::DeltaHistogram,
        Chart::MrScatter,
        Chart::BinBars,
        Chart::SeverityBars,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Chart::DeltaHistogram => "delta_histogram",
            Chart::MrScatter => "mr_scatter",
            Chart::BinBars => "bin_bars",
            Chart::SeverityBars => "severity_bars",
        }
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Chart::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownChart(s.to_string()))
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const ZS_COLOR: &str = "#4c72b0";
const AG_COLOR: &str = "#dd8452";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
        )
        .unwrap();
        writeln!(
            body,
            "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
        )
        .unwrap();
        writeln!(
            body,
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            W / 2.0,
            escape(title)
        )
        .unwrap();
        Canvas { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, extra: &str) {
        writeln!(
            self.body,
            "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"black\"{extra}/>"
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, attrs: &str) {
        writeln!(
            self.body,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" {attrs}/>"
        )
        .unwrap();
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        writeln!(
            self.body,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        )
        .unwrap();
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, y0) = (LEFT, H - BOTTOM);
        self.line(x0, y0, W - RIGHT, y0, "");
        self.line(x0, TOP, x0, y0, "");
        self.text((LEFT + W - RIGHT) / 2.0, H - 12.0, "middle", x_label);
        writeln!(
            self.body,
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
            (TOP + y0) / 2.0,
            (TOP + y0) / 2.0,
            escape(y_label)
        )
        .unwrap();
    }

    fn y_ticks(&mut self, max: f64, steps: usize, fmt: impl Fn(f64) -> String) {
        for i in 0..=steps {
            let v = max * i as f64 / steps as f64;
            let y = sy(v / max);
            self.line(LEFT - 4.0, y, LEFT, y, "");
            self.text(LEFT - 7.0, y + 4.0, "end", &fmt(v));
        }
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let x = W - RIGHT - 150.0;
            let y = TOP + 8.0 + 18.0 * i as f64;
            self.rect(x, y - 9.0, 10.0, 10.0, &format!("fill=\"{color}\""));
            self.text(x + 16.0, y, "start", label);
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Plot-area x for a unit-interval position.
fn sx(u: f64) -> f64 {
    LEFT + u * (W - LEFT - RIGHT)
}

/// Plot-area y for a unit-interval position (0 at the bottom).
fn sy(u: f64) -> f64 {
    (H - BOTTOM) - u * (H - BOTTOM - TOP)
}

pub fn render(bundle: &AnalysisBundle, chart: Chart) -> Result<String> {
    match chart {
        Chart::DeltaHistogram => delta_histogram(bundle),
        Chart::MrScatter => mr_scatter(bundle),
        Chart::BinBars => bin_bars(bundle),
        Chart::SeverityBars => severity_bars(bundle),
    }
}

/// ΔH counts in bins of width 0.1 centred on multiples of 0.1.
fn delta_histogram(bundle: &AnalysisBundle) -> Result<String> {
    let deltas = bundle.paired.entropy.values();
    if deltas.is_empty() {
        return Err(Error::NothingToPlot);
    }
    let idx: Vec<i64> = deltas.iter().map(|d| (d / 0.1).round() as i64).collect();
    let (lo, hi) = (
        *idx.iter().min().expect("non-empty"),
        *idx.iter().max().expect("non-empty"),
    );
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for i in &idx {
        counts[(i - lo) as usize] += 1;
    }
    let max = *counts.iter().max().expect("non-empty") as f64;
    let mut c = Canvas::new("Paired entropy change (agentic - zero-shot)");
    c.axes("ΔH (nats)", "questions");
    c.y_ticks(max, 4, |v| format!("{v:.0}"));
    // one extra half-bin of padding on each side
    let span = (hi - lo + 2) as f64;
    let width = 1.0 / span;
    for (k, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let centre = (k as f64 + 1.0) / span;
        let x = sx(centre - width / 2.0);
        let top = sy(n as f64 / max);
        let label = format!("{:.1}", (lo + k as i64) as f64 * 0.1);
        writeln!(
            c.body,
            "<rect class=\"bar\" x=\"{x:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{ZS_COLOR}\" stroke=\"white\"><title>{} : {n}</title></rect>",
            width * (W - LEFT - RIGHT),
            sy(0.0) - top,
            escape(&label)
        )
        .unwrap();
    }
    for k in 0..counts.len() {
        if counts.len() > 12 && k % 2 == 1 {
            continue;
        }
        let centre = (k as f64 + 1.0) / span;
        c.text(
            sx(centre),
            H - BOTTOM + 16.0,
            "middle",
            &format!("{:.1}", (lo + k as i64) as f64 * 0.1),
        );
    }
    if let Some(s) = &bundle.paired.entropy.summary {
        let m = s.median / 0.1 - lo as f64 + 1.0;
        let x = sx(m / span);
        c.line(x, TOP, x, sy(0.0), " stroke-dasharray=\"4 3\" class=\"median\"");
    }
    Ok(c.finish())
}

/// Majority fraction against robustness for each question and condition,
/// with the anomaly zone shaded and flagged points marked.
fn mr_scatter(bundle: &AnalysisBundle) -> Result<String> {
    let points: Vec<(Condition, &str, f64, f64)> = bundle
        .per_question
        .iter()
        .flat_map(|row| {
            Condition::ALL.into_iter().filter_map(|cond| {
                row.get(cond)
                    .map(|o| (cond, o.question_id.as_str(), o.majority_fraction, o.robustness))
            })
        })
        .collect();
    if points.is_empty() {
        return Err(Error::NothingToPlot);
    }
    let (m_min, r_max) = bundle.config_echo.config.anomaly_thresholds;
    let mut c = Canvas::new("Consensus strength vs robustness");
    c.rect(
        sx(m_min),
        sy(r_max),
        sx(1.0) - sx(m_min),
        sy(0.0) - sy(r_max),
        "class=\"anomaly-zone\" fill=\"#d62728\" fill-opacity=\"0.12\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"",
    );
    c.axes("majority fraction M", "robustness R");
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        c.line(sx(v), sy(0.0), sx(v), sy(0.0) + 4.0, "");
        c.text(sx(v), H - BOTTOM + 16.0, "middle", &format!("{v:.1}"));
    }
    c.y_ticks(1.0, 5, |v| format!("{v:.1}"));
    let flagged = |q: &str, cond: Condition| {
        bundle
            .anomalies
            .iter()
            .any(|a| a.question_id == q && a.condition == cond)
    };
    for &(cond, q, m, r) in &points {
        let color = if cond == Condition::ZeroShot {
            ZS_COLOR
        } else {
            AG_COLOR
        };
        writeln!(
            c.body,
            "<circle class=\"point\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.6\"/>",
            sx(m),
            sy(r)
        )
        .unwrap();
        if flagged(q, cond) {
            writeln!(
                c.body,
                "<circle class=\"anomaly\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"7\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"><title>{} ({cond})</title></circle>",
                sx(m),
                sy(r),
                escape(q)
            )
            .unwrap();
        }
    }
    c.legend(&[("zero-shot", ZS_COLOR), ("agentic", AG_COLOR)]);
    Ok(c.finish())
}

/// Share of questions per robustness bin, by condition.
fn bin_bars(bundle: &AnalysisBundle) -> Result<String> {
    let mut counts = [[0usize; 3]; 2];
    for row in &bundle.per_question {
        for (k, cond) in Condition::ALL.into_iter().enumerate() {
            if let Some(o) = row.get(cond) {
                counts[k][o.robustness_bin.index()] += 1;
            }
        }
    }
    let totals = counts.map(|c| c.iter().sum::<usize>());
    if totals.iter().all(|&t| t == 0) {
        return Err(Error::NothingToPlot);
    }
    let mut c = Canvas::new("Robustness bins");
    c.axes("robustness bin", "share of questions");
    c.y_ticks(1.0, 4, |v| format!("{:.0}%", v * 100.0));
    let group = 1.0 / 3.0;
    for (b, bin) in RobustnessBin::ALL.into_iter().enumerate() {
        for (k, color) in [ZS_COLOR, AG_COLOR].into_iter().enumerate() {
            if totals[k] == 0 {
                continue;
            }
            let share = counts[k][b] as f64 / totals[k] as f64;
            let x = sx(group * b as f64 + group * (0.15 + 0.35 * k as f64));
            let w = sx(group * 0.35) - sx(0.0);
            let top = sy(share);
            c.rect(x, top, w, sy(0.0) - top, &format!("class=\"bar\" fill=\"{color}\""));
            c.text(x + w / 2.0, top - 4.0, "middle", &counts[k][b].to_string());
        }
        c.text(sx(group * (b as f64 + 0.5)), H - BOTTOM + 16.0, "middle", bin.as_str());
    }
    c.legend(&[("zero-shot", ZS_COLOR), ("agentic", AG_COLOR)]);
    Ok(c.finish())
}

/// Severity composition of incorrect outputs, pooled and per dataset.
fn severity_bars(bundle: &AnalysisBundle) -> Result<String> {
    let profile = &bundle.severity.as_ref().ok_or(Error::NothingToPlot)?.profile;
    let strata: Vec<_> = profile
        .strata
        .iter()
        .filter(|s| s.condition == ConditionStratum::Both && s.proportions.is_some())
        .collect();
    if strata.is_empty() {
        return Err(Error::NothingToPlot);
    }
    let colors = ["#55a868", "#dd8452", "#c44e52"];
    let mut c = Canvas::new("Severity of incorrect outputs");
    c.axes("stratum", "share of annotated incorrect outputs");
    c.y_ticks(1.0, 4, |v| format!("{:.0}%", v * 100.0));
    let slot = 1.0 / strata.len() as f64;
    for (i, s) in strata.iter().enumerate() {
        let props = s.proportions.expect("filtered");
        let counts = [s.low, s.moderate, s.high];
        let x = sx(slot * (i as f64 + 0.2));
        let w = sx(slot * 0.6) - sx(0.0);
        let mut base = 0.0;
        for (k, p) in props.iter().enumerate() {
            let (y_top, y_bottom) = (sy(base + p), sy(base));
            c.rect(
                x,
                y_top,
                w,
                y_bottom - y_top,
                &format!("class=\"bar\" fill=\"{}\"", colors[k]),
            );
            if *p > 0.04 {
                c.text(
                    x + w / 2.0,
                    (y_top + y_bottom) / 2.0 + 4.0,
                    "middle",
                    &format!("{:.0}% (n={})", p * 100.0, counts[k]),
                );
            }
            base += p;
        }
        let label = if s.dataset == POOLED {
            "pooled"
        } else {
            s.dataset.as_str()
        };
        c.text(x + w / 2.0, H - BOTTOM + 16.0, "middle", label);
    }
    c.legend(&[("low", colors[0]), ("moderate", colors[1]), ("high", colors[2])]);
    Ok(c.finish())
}
