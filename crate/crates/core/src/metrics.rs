//! Per-question collective-behaviour metrics and paired condition deltas.
//!
//! Conventions:
//! - entropies are in nats;
//! - entropy and majority fraction are taken over *responders* (panel
//!   members that did not abstain);
//! - robustness divides by the full panel size N, so an abstention counts
//!   as not correct;
//! - a missing (question, model, condition) record reads as an abstention.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{AnalysisConfig, Answer, Condition, PanelDataset, SeverityLevel, TokenizerMode};
use crate::stats::descriptive;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionCount {
    pub label: String,
    pub count: usize,
}

/// Counts of each option (in the question's option order, zeros included).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDistribution {
    pub question_id: String,
    pub condition: Condition,
    pub counts: Vec<OptionCount>,
    pub abstain_count: usize,
    pub responders: usize,
}

impl AnswerDistribution {
    pub fn count(&self, label: &str) -> usize {
        self.counts.iter().find(|c| c.label == label).map_or(0, |c| c.count)
    }

    /// `p(o) = n(o) / responders`, aligned with `counts`.
    pub fn probabilities<F: Real>(&self) -> Vec<F> {
        let denom = F::from_count(self.responders.max(1));
        self.counts.iter().map(|c| F::from_count(c.count) / denom).collect()
    }
}

pub fn answer_distribution(
    dataset: &PanelDataset,
    question_id: &str,
    condition: Condition,
) -> Result<AnswerDistribution> {
    let spec = dataset
        .question(question_id)
        .ok_or_else(|| Error::UnknownQuestion(question_id.to_string()))?;
    let mut counts: Vec<OptionCount> = spec
        .options
        .iter()
        .map(|l| OptionCount {
            label: l.clone(),
            count: 0,
        })
        .collect();
    let mut abstain = 0;
    for (_, answer) in dataset.answers(question_id, condition) {
        match answer.label().and_then(|l| spec.option_index(l)) {
            Some(i) => counts[i].count += 1,
            None => abstain += 1,
        }
    }
    let responders = dataset.panel_size() - abstain;
    if responders == 0 {
        return Err(Error::NoDecisions(question_id.to_string()));
    }
    Ok(AnswerDistribution {
        question_id: question_id.to_string(),
        condition,
        counts,
        abstain_count: abstain,
        responders,
    })
}

/// Shannon entropy in nats. Terms are summed in descending count order so
/// that distributions with the same count multiset give bit-identical values.
pub fn decision_entropy<F: Real>(dist: &AnswerDistribution) -> F {
    let mut counts: Vec<usize> = dist.counts.iter().map(|c| c.count).filter(|&c| c > 0).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let n = F::from_count(dist.responders);
    let h = counts.into_iter().fold(F::zero(), |acc, c| {
        let p = F::from_count(c) / n;
        acc - p * p.ln()
    });
    // a single nonzero term is exactly 1 * ln 1 = 0; keep -0.0 out
    h.max(F::zero())
}

/// Modal option and majority fraction. Ties go to the option listed first.
pub fn majority<F: Real>(dist: &AnswerDistribution) -> (String, F) {
    let mut best = &dist.counts[0];
    for c in &dist.counts[1..] {
        if c.count > best.count {
            best = c;
        }
    }
    let m = F::from_count(best.count) / F::from_count(dist.responders.max(1));
    (best.label.clone(), m)
}

/// `(correct_count, R)` with `R = correct_count / N`.
pub fn robustness<F: Real>(dataset: &PanelDataset, question_id: &str, condition: Condition) -> Result<(usize, F)> {
    let spec = dataset
        .question(question_id)
        .ok_or_else(|| Error::UnknownQuestion(question_id.to_string()))?;
    let correct = dataset
        .answers(question_id, condition)
        .filter(|(_, a)| a.label() == Some(spec.correct_option.as_str()))
        .count();
    let n = dataset.panel_size();
    Ok((correct, F::from_count(correct) / F::from_count(n.max(1))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustnessBin {
    Low,
    Medium,
    High,
}

impl RobustnessBin {
    pub const ALL: [RobustnessBin; 3] = [RobustnessBin::Low, RobustnessBin::Medium, RobustnessBin::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RobustnessBin::Low => "low",
            RobustnessBin::Medium => "medium",
            RobustnessBin::High => "high",
        }
    }
}

/// `low` below the first edge, `high` at or above the second.
pub fn robustness_bin<F: Real>(r: F, edges: (f64, f64)) -> RobustnessBin {
    if r < F::lit(edges.0) {
        RobustnessBin::Low
    } else if r < F::lit(edges.1) {
        RobustnessBin::Medium
    } else {
        RobustnessBin::High
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOutcome<F> {
    pub question_id: String,
    pub condition: Condition,
    pub distribution: AnswerDistribution,
    pub entropy: F,
    pub majority_fraction: F,
    pub modal_option: String,
    pub correct_option: String,
    pub majority_correct: bool,
    pub correct_count: usize,
    pub robustness: F,
    pub robustness_bin: RobustnessBin,
}

pub fn question_outcome<F: Real>(
    dataset: &PanelDataset,
    question_id: &str,
    condition: Condition,
    config: &AnalysisConfig,
) -> Result<QuestionOutcome<F>> {
    let distribution = answer_distribution(dataset, question_id, condition)?;
    let spec = &dataset.questions()[question_id];
    let entropy = decision_entropy(&distribution);
    let (modal_option, majority_fraction) = majority(&distribution);
    let (correct_count, r) = robustness(dataset, question_id, condition)?;
    Ok(QuestionOutcome {
        question_id: question_id.to_string(),
        condition,
        entropy,
        majority_fraction,
        majority_correct: modal_option == spec.correct_option,
        modal_option,
        correct_option: spec.correct_option.clone(),
        correct_count,
        robustness: r,
        robustness_bin: robustness_bin(r, config.robustness_bin_edges),
        distribution,
    })
}

/// Both conditions of one question; a condition is `None` when every panel
/// member abstained there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionPair<F> {
    pub question_id: String,
    pub dataset_tag: String,
    pub zero_shot: Option<QuestionOutcome<F>>,
    pub agentic: Option<QuestionOutcome<F>>,
}

impl<F> QuestionPair<F> {
    pub fn get(&self, condition: Condition) -> Option<&QuestionOutcome<F>> {
        match condition {
            Condition::ZeroShot => self.zero_shot.as_ref(),
            Condition::Agentic => self.agentic.as_ref(),
        }
    }

    pub fn both(&self) -> Option<(&QuestionOutcome<F>, &QuestionOutcome<F>)> {
        Some((self.zero_shot.as_ref()?, self.agentic.as_ref()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable<F> {
    pub rows: Vec<QuestionPair<F>>,
    pub warnings: Vec<String>,
}

impl<F> OutcomeTable<F> {
    pub fn outcomes(&self) -> impl Iterator<Item = &QuestionOutcome<F>> {
        self.rows
            .iter()
            .flat_map(|r| r.zero_shot.iter().chain(r.agentic.iter()))
    }

    pub fn outcomes_for(&self, condition: Condition) -> impl Iterator<Item = &QuestionOutcome<F>> {
        self.rows.iter().filter_map(move |r| r.get(condition))
    }
}

/// Per-question outcomes for both conditions, in dataset question order.
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn compute_outcomes<F: Real>(dataset: &PanelDataset, config: &AnalysisConfig) -> OutcomeTable<F> {
    let per_question: Vec<(QuestionPair<F>, Vec<String>)> = dataset
        .questions()
        .par_iter()
        .map(|(qid, spec)| {
            let mut warnings = Vec::new();
            let mut get = |c: Condition| match question_outcome(dataset, qid, c, config) {
                Ok(o) => Some(o),
                Err(e) => {
                    warnings.push(format!("{qid} ({c}): {e}"));
                    None
                }
            };
            let pair = QuestionPair {
                question_id: qid.clone(),
                dataset_tag: spec.dataset_tag.clone(),
                zero_shot: get(Condition::ZeroShot),
                agentic: get(Condition::Agentic),
            };
            (pair, warnings)
        })
        .collect();
    let mut rows = Vec::with_capacity(per_question.len());
    let mut warnings = Vec::new();
    for (pair, w) in per_question {
        rows.push(pair);
        warnings.extend(w);
    }
    OutcomeTable { rows, warnings }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "H")]
    Entropy,
    #[serde(rename = "M")]
    MajorityFraction,
    #[serde(rename = "R")]
    Robustness,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Entropy, Metric::MajorityFraction, Metric::Robustness];

    pub fn symbol(self) -> &'static str {
        match self {
            Metric::Entropy => "H",
            Metric::MajorityFraction => "M",
            Metric::Robustness => "R",
        }
    }

    pub fn of<F: Copy>(self, o: &QuestionOutcome<F>) -> F {
        match self {
            Metric::Entropy => o.entropy,
            Metric::MajorityFraction => o.majority_fraction,
            Metric::Robustness => o.robustness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftCategory {
    Decrease,
    Increase,
    NoChange,
    /// `ΔM > 0` and the agentic majority is correct.
    IncreaseCorrect,
    /// `ΔM > 0` and the agentic majority is incorrect.
    IncreaseIncorrect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDelta<F> {
    pub question_id: String,
    pub metric: Metric,
    pub zero_shot: F,
    pub agentic: F,
    pub delta: F,
    pub shift: ShiftCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary<F> {
    pub n: usize,
    pub median: F,
    pub q1: F,
    pub q3: F,
    pub iqr: F,
    pub mean: F,
    pub n_negative: usize,
    pub n_positive: usize,
    pub n_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDeltas<F> {
    pub metric: Metric,
    pub deltas: Vec<PairedDelta<F>>,
    pub summary: Option<DeltaSummary<F>>,
    /// Questions lacking one of the two conditions.
    pub excluded: Vec<String>,
}

impl<F: Copy> PairedDeltas<F> {
    pub fn values(&self) -> Vec<F> {
        self.deltas.iter().map(|d| d.delta).collect()
    }
}

/// A delta this close to zero is the same value reached by two rounding
/// paths and counts as no change.
pub fn is_zero_delta<F: Real>(d: F) -> bool {
    F::approx_eq(d, F::zero())
}

fn sign_shift<F: Real>(d: F) -> ShiftCategory {
    if is_zero_delta(d) {
        ShiftCategory::NoChange
    } else if d < F::zero() {
        ShiftCategory::Decrease
    } else {
        ShiftCategory::Increase
    }
}

/// Classifies a majority-fraction delta by the agentic majority's
/// correctness.
pub fn categorize_agreement_shift<F: Real>(
    delta: &PairedDelta<F>,
    agentic_majority_correct: bool,
) -> Result<ShiftCategory> {
    if delta.metric != Metric::MajorityFraction {
        return Err(Error::InvalidArgument(format!(
            "agreement shift needs a majority-fraction delta, got {}",
            delta.metric.symbol()
        )));
    }
    Ok(match sign_shift(delta.delta) {
        ShiftCategory::Increase if agentic_majority_correct => ShiftCategory::IncreaseCorrect,
        ShiftCategory::Increase => ShiftCategory::IncreaseIncorrect,
        other => other,
    })
}

pub fn summarize_deltas<F: Real>(values: &[F]) -> Option<DeltaSummary<F>> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite deltas"));
    let q1 = descriptive::quantile_sorted(&sorted, F::lit(0.25));
    let q3 = descriptive::quantile_sorted(&sorted, F::lit(0.75));
    let (mut neg, mut pos, mut zero) = (0, 0, 0);
    for &d in values {
        match sign_shift(d) {
            ShiftCategory::NoChange => zero += 1,
            ShiftCategory::Decrease => neg += 1,
            _ => pos += 1,
        }
    }
    Some(DeltaSummary {
        n: values.len(),
        median: descriptive::quantile_sorted(&sorted, F::lit(0.5)),
        q1,
        q3,
        iqr: q3 - q1,
        mean: descriptive::mean(values),
        n_negative: neg,
        n_positive: pos,
        n_zero: zero,
    })
}

/// Agentic minus zero-shot, one entry per question with both conditions.
pub fn paired_deltas<F: Real>(table: &OutcomeTable<F>, metric: Metric) -> PairedDeltas<F> {
    let mut deltas = Vec::new();
    let mut excluded = Vec::new();
    for row in &table.rows {
        let Some((zs, ag)) = row.both() else {
            excluded.push(row.question_id.clone());
            continue;
        };
        let (z, a) = (metric.of(zs), metric.of(ag));
        let mut d = PairedDelta {
            question_id: row.question_id.clone(),
            metric,
            zero_shot: z,
            agentic: a,
            delta: a - z,
            shift: sign_shift(a - z),
        };
        if metric == Metric::MajorityFraction {
            d.shift = categorize_agreement_shift(&d, ag.majority_correct).expect("metric is M");
        }
        deltas.push(d);
    }
    let values: Vec<F> = deltas.iter().map(|d| d.delta).collect();
    PairedDeltas {
        metric,
        summary: summarize_deltas(&values),
        deltas,
        excluded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionLabel {
    Improved,
    Decreased,
    NoChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinTransition {
    pub question_id: String,
    pub zero_shot: RobustnessBin,
    pub agentic: RobustnessBin,
    pub label: TransitionLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinTransitions {
    /// `counts[zero_shot_bin][agentic_bin]`, bins ordered low, medium, high.
    pub counts: [[usize; 3]; 3],
    pub transitions: Vec<BinTransition>,
    pub improved: usize,
    pub decreased: usize,
    pub no_change: usize,
}

pub fn transition_label(from: RobustnessBin, to: RobustnessBin) -> TransitionLabel {
    match to.cmp(&from) {
        std::cmp::Ordering::Greater => TransitionLabel::Improved,
        std::cmp::Ordering::Less => TransitionLabel::Decreased,
        std::cmp::Ordering::Equal => TransitionLabel::NoChange,
    }
}

/// Robustness-bin transitions over questions with both conditions.
pub fn bin_transitions<F>(table: &OutcomeTable<F>) -> BinTransitions {
    let mut out = BinTransitions {
        counts: [[0; 3]; 3],
        transitions: Vec::new(),
        improved: 0,
        decreased: 0,
        no_change: 0,
    };
    for row in &table.rows {
        let Some((zs, ag)) = row.both() else { continue };
        let (from, to) = (zs.robustness_bin, ag.robustness_bin);
        out.counts[from.index()][to.index()] += 1;
        let label = transition_label(from, to);
        match label {
            TransitionLabel::Improved => out.improved += 1,
            TransitionLabel::Decreased => out.decreased += 1,
            TransitionLabel::NoChange => out.no_change += 1,
        }
        out.transitions.push(BinTransition {
            question_id: row.question_id.clone(),
            zero_shot: from,
            agentic: to,
            label,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly<F> {
    pub question_id: String,
    pub condition: Condition,
    pub majority_fraction: F,
    pub robustness: F,
    pub modal_option: String,
    pub correct_option: String,
}

/// `M >= m_min && R < r_max`.
pub fn in_anomaly_zone<F: Real>(m: F, r: F, thresholds: (f64, f64)) -> bool {
    m >= F::lit(thresholds.0) && r < F::lit(thresholds.1)
}

/// High-consensus, low-robustness question/condition pairs.
pub fn flag_anomalies<'a, F: Real>(
    outcomes: impl IntoIterator<Item = &'a QuestionOutcome<F>>,
    config: &AnalysisConfig,
) -> Vec<Anomaly<F>> {
    outcomes
        .into_iter()
        .filter(|o| in_anomaly_zone(o.majority_fraction, o.robustness, config.anomaly_thresholds))
        .map(|o| Anomaly {
            question_id: o.question_id.clone(),
            condition: o.condition,
            majority_fraction: o.majority_fraction,
            robustness: o.robustness,
            modal_option: o.modal_option.clone(),
            correct_option: o.correct_option.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbosityMeasure {
    Reasoning,
    Summary,
    Total,
}

impl VerbosityMeasure {
    pub const ALL: [VerbosityMeasure; 3] = [
        VerbosityMeasure::Reasoning,
        VerbosityMeasure::Summary,
        VerbosityMeasure::Total,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerbosityMeasure::Reasoning => "reasoning",
            VerbosityMeasure::Summary => "summary",
            VerbosityMeasure::Total => "total",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbositySamples<F> {
    pub condition: Condition,
    pub measure: VerbosityMeasure,
    pub correct: Vec<F>,
    pub incorrect: Vec<F>,
    pub abstain_excluded: usize,
    pub missing_measure: usize,
    pub warnings: Vec<String>,
}

/// Token count of the default tokenizer: Unicode-whitespace separated words.
pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

fn response_length(r: &crate::model::ResponseRecord, measure: VerbosityMeasure, mode: TokenizerMode) -> Option<u64> {
    match mode {
        // the raw text is the only segment available; every measure reads it
        TokenizerMode::WhitespaceDefault => r.raw_text.as_deref().map(|t| whitespace_tokens(t) as u64),
        TokenizerMode::ExternalCounts => match measure {
            VerbosityMeasure::Reasoning => r.reasoning_tokens,
            VerbosityMeasure::Summary => r.summary_tokens,
            VerbosityMeasure::Total => match (r.reasoning_tokens, r.summary_tokens) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(0) + b.unwrap_or(0)),
            },
        },
    }
}

/// Lengths of correct and incorrect responses within one condition.
pub fn verbosity_samples<F: Real>(
    dataset: &PanelDataset,
    condition: Condition,
    measure: VerbosityMeasure,
    mode: TokenizerMode,
) -> Result<VerbositySamples<F>> {
    let mut out = VerbositySamples {
        condition,
        measure,
        correct: Vec::new(),
        incorrect: Vec::new(),
        abstain_excluded: 0,
        missing_measure: 0,
        warnings: Vec::new(),
    };
    for (qid, spec) in dataset.questions() {
        for m in dataset.models() {
            let Some(r) = dataset.response(qid, m, condition) else {
                continue;
            };
            let Answer::Option(label) = &r.answer else {
                out.abstain_excluded += 1;
                continue;
            };
            let Some(len) = response_length(r, measure, mode) else {
                out.missing_measure += 1;
                continue;
            };
            let v = F::from_u64(len).expect("token count representable");
            if *label == spec.correct_option {
                out.correct.push(v);
            } else {
                out.incorrect.push(v);
            }
        }
    }
    if out.correct.is_empty() && out.incorrect.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} length unavailable for every {condition} response",
            measure.as_str()
        )));
    }
    if out.correct.is_empty() {
        out.warnings.push("no correct responses".into());
    }
    if out.incorrect.is_empty() {
        out.warnings.push("no incorrect responses".into());
    }
    if out.abstain_excluded > 0 {
        out.warnings
            .push(format!("{} abstaining responses excluded", out.abstain_excluded));
    }
    Ok(out)
}

/// Entropy (nats) of aggregated severity labels over one question's
/// incorrect options.
pub fn severity_entropy<F: Real>(labels: &[SeverityLevel]) -> Result<F> {
    if labels.is_empty() {
        return Err(Error::InsufficientData("no annotated options".into()));
    }
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.ordinal() as usize] += 1;
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let n = F::from_count(labels.len());
    let h = counts.iter().filter(|&&c| c > 0).fold(F::zero(), |acc, &c| {
        let p = F::from_count(c) / n;
        acc - p * p.ln()
    });
    Ok(h.max(F::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QuestionSpec, ResponseRecord};
    use indexmap::IndexMap;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    /// One question, one condition: vote counts per option (plus abstains).
    fn panel(counts: &[usize], abstain: usize, correct: &str) -> PanelDataset {
        let opts = labels(counts.len().max(2));
        let mut qs = IndexMap::new();
        qs.insert(
            "Q".to_string(),
            QuestionSpec {
                question_id: "Q".into(),
                dataset_tag: "t".into(),
                options: opts.clone(),
                option_texts: None,
                correct_option: correct.into(),
            },
        );
        let mut models = Vec::new();
        let mut rs = Vec::new();
        let mut k = 0;
        for (i, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                let m = format!("m{k:02}");
                rs.push(ResponseRecord::new(
                    "Q",
                    m.as_str(),
                    Condition::ZeroShot,
                    Answer::from(opts[i].as_str()),
                ));
                models.push(m);
                k += 1;
            }
        }
        for _ in 0..abstain {
            let m = format!("m{k:02}");
            rs.push(ResponseRecord::new(
                "Q",
                m.as_str(),
                Condition::ZeroShot,
                Answer::Abstain,
            ));
            models.push(m);
            k += 1;
        }
        PanelDataset::new(qs, models, rs)
    }

    fn dist(counts: &[usize], abstain: usize) -> AnswerDistribution {
        answer_distribution(&panel(counts, abstain, "A"), "Q", Condition::ZeroShot).unwrap()
    }

    #[test]
    fn distribution_counts() {
        let d = dist(&[33, 0, 1, 0], 0);
        assert_eq!((d.count("A"), d.count("C"), d.responders), (33, 1, 34));
        let d = dist(&[0, 2], 0);
        assert_eq!(d.count("B"), 2);
        let d = dist(&[1, 1, 0], 1);
        assert_eq!(
            (d.count("A"), d.count("B"), d.abstain_count, d.responders),
            (1, 1, 1, 2)
        );
        let p: Vec<f64> = d.probabilities();
        assert_eq!(p, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn all_abstain_has_no_decisions() {
        let ds = panel(&[0, 0], 3, "A");
        assert!(matches!(
            answer_distribution(&ds, "Q", Condition::ZeroShot),
            Err(Error::NoDecisions(_))
        ));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(decision_entropy::<f64>(&dist(&[34, 0, 0, 0], 0)), 0.0);
        let h: f64 = decision_entropy(&dist(&[33, 1, 0, 0], 0));
        assert_eq!(crate::round2(h), 0.13);
        let h: f64 = decision_entropy(&dist(&[17, 17], 0));
        assert!((h - std::f64::consts::LN_2).abs() < 1e-15);
        let h32: f32 = decision_entropy(&dist(&[17, 17], 0));
        assert!((h32 - std::f32::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn majority_values() {
        let (o, m): (String, f64) = majority(&dist(&[21, 13], 0));
        assert_eq!((o.as_str(), crate::round2(m)), ("A", 0.62));
        let (o, m): (String, f64) = majority(&dist(&[17, 17], 0));
        assert_eq!((o.as_str(), m), ("A", 0.5));
        let (o, m): (String, f64) = majority(&dist(&[0, 0, 0, 34], 0));
        assert_eq!((o.as_str(), m), ("D", 1.0));
    }

    #[test]
    fn robustness_values() {
        let (c, r): (usize, f64) = robustness(&panel(&[20, 14], 0, "A"), "Q", Condition::ZeroShot).unwrap();
        assert_eq!((c, crate::round2(r)), (20, 0.59));
        let (c, r): (usize, f64) = robustness(&panel(&[33, 1], 0, "A"), "Q", Condition::ZeroShot).unwrap();
        assert_eq!((c, crate::round2(r)), (33, 0.97));
        let (c, r): (usize, f64) = robustness(&panel(&[0, 34], 0, "A"), "Q", Condition::ZeroShot).unwrap();
        assert_eq!((c, r), (0, 0.0));
        // abstentions stay in the denominator
        let (_, r): (usize, f64) = robustness(&panel(&[2, 0], 2, "A"), "Q", Condition::ZeroShot).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn bins() {
        let e = (0.4, 0.8);
        assert_eq!(robustness_bin(20.0_f64 / 34.0, e), RobustnessBin::Medium);
        assert_eq!(robustness_bin(0.8_f64, e), RobustnessBin::High);
        assert_eq!(robustness_bin(0.39999_f64, e), RobustnessBin::Low);
        assert_eq!(robustness_bin(0.4_f64, e), RobustnessBin::Medium);
    }

    fn pd(delta: f64) -> PairedDelta<f64> {
        PairedDelta {
            question_id: "Q".into(),
            metric: Metric::MajorityFraction,
            zero_shot: 0.5,
            agentic: 0.5 + delta,
            delta,
            shift: ShiftCategory::NoChange,
        }
    }

    #[test]
    fn agreement_shift_categories() {
        assert_eq!(
            categorize_agreement_shift(&pd(0.35), true).unwrap(),
            ShiftCategory::IncreaseCorrect
        );
        assert_eq!(
            categorize_agreement_shift(&pd(0.09), false).unwrap(),
            ShiftCategory::IncreaseIncorrect
        );
        assert_eq!(
            categorize_agreement_shift(&pd(0.0), true).unwrap(),
            ShiftCategory::NoChange
        );
        assert_eq!(
            categorize_agreement_shift(&pd(-0.03), true).unwrap(),
            ShiftCategory::Decrease
        );
        let mut h = pd(0.1);
        h.metric = Metric::Entropy;
        assert!(categorize_agreement_shift(&h, true).is_err());
    }

    #[test]
    fn transitions() {
        use RobustnessBin::*;
        assert_eq!(transition_label(Medium, High), TransitionLabel::Improved);
        assert_eq!(transition_label(Medium, Low), TransitionLabel::Decreased);
        assert_eq!(transition_label(High, High), TransitionLabel::NoChange);
    }

    #[test]
    fn anomaly_zone_boundaries() {
        let t = (0.8, 0.4);
        assert!(in_anomaly_zone(0.94_f64, 0.03, t));
        assert!(in_anomaly_zone(0.82_f64, 0.15, t));
        assert!(!in_anomaly_zone(0.97_f64, 0.97, t));
        assert!(in_anomaly_zone(4.0_f64 / 5.0, 0.0, t));
        assert!(!in_anomaly_zone(0.9_f64, 0.4, t));
    }

    #[test]
    fn severity_entropy_values() {
        use SeverityLevel::*;
        assert_eq!(severity_entropy::<f64>(&[Moderate, Moderate]).unwrap(), 0.0);
        let h: f64 = severity_entropy(&[Low, Moderate, High]).unwrap();
        assert!((h - 3f64.ln()).abs() < 1e-15);
        let h: f64 = severity_entropy(&[Moderate, Moderate, High]).unwrap();
        let expect = -(2.0 / 3.0 * (2.0f64 / 3.0).ln()) - (1.0 / 3.0 * (1.0f64 / 3.0).ln());
        assert!((h - expect).abs() < 1e-15);
        assert!((h - 0.6365).abs() < 1e-4);
        assert!(severity_entropy::<f64>(&[]).is_err());
    }

    #[test]
    fn whitespace_default_tokenizer() {
        assert_eq!(whitespace_tokens("The answer is B."), 4);
        assert_eq!(whitespace_tokens("  a\tb\nc  "), 3);
    }

    #[test]
    fn summary_counts_partition() {
        let s = summarize_deltas(&[-0.5, 0.0, 0.25, 0.25, -1e-17, 1.0]).unwrap();
        assert_eq!((s.n_negative, s.n_positive, s.n_zero), (1, 3, 2));
        assert_eq!(s.median, 0.125);
    }

    /// Every distribution of 6 votes over 3 options.
    fn compositions() -> Vec<[usize; 3]> {
        let mut v = Vec::new();
        for a in 0..=6 {
            for b in 0..=(6 - a) {
                v.push([a, b, 6 - a - b]);
            }
        }
        v
    }

    #[test]
    fn moving_a_vote_to_the_leader_tightens_consensus() {
        for c in compositions() {
            let d = dist(&c, 0);
            let (modal, m0): (String, f64) = majority(&d);
            let h0: f64 = decision_entropy(&d);
            let lead = d.count(&modal);
            let strictly_leads = d.counts.iter().filter(|x| x.label != modal).all(|x| x.count < lead);
            for (i, src) in c.iter().enumerate() {
                if d.counts[i].label == modal || *src == 0 {
                    continue;
                }
                let mut moved = c;
                moved[i] -= 1;
                moved[labels(3).iter().position(|l| *l == modal).unwrap()] += 1;
                let d2 = dist(&moved, 0);
                let (_, m1): (String, f64) = majority(&d2);
                let h1: f64 = decision_entropy(&d2);
                assert!(m1 >= m0, "{c:?} -> {moved:?}");
                if strictly_leads {
                    assert!(h1 <= h0 + 1e-15, "{c:?} -> {moved:?}");
                }
            }
        }
    }

    #[test]
    fn entropy_bounds_and_unanimity() {
        for c in compositions() {
            let d = dist(&c, 0);
            let h: f64 = decision_entropy(&d);
            let (_, m): (String, f64) = majority(&d);
            assert!(h >= 0.0 && h <= 3f64.ln() + 1e-15);
            assert_eq!(h == 0.0, m == 1.0, "{c:?}");
        }
    }
}
