//! Domain types shared by every stage, and dataset integrity checks.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sentinel used in files for a response that could not be adjudicated.
pub const ABSTAIN: &str = "ABSTAIN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSpec {
    pub question_id: String,
    pub dataset_tag: String,
    pub options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_texts: Option<Vec<String>>,
    pub correct_option: String,
}

impl QuestionSpec {
    pub fn option_index(&self, label: &str) -> Option<usize> {
        self.options.iter().position(|o| o == label)
    }

    pub fn has_option(&self, label: &str) -> bool {
        self.option_index(label).is_some()
    }

    pub fn incorrect_options(&self) -> impl Iterator<Item = &str> {
        self.options
            .iter()
            .map(String::as_str)
            .filter(move |o| *o != self.correct_option)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    ZeroShot,
    Agentic,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::ZeroShot, Condition::Agentic];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::ZeroShot => "zero_shot",
            Condition::Agentic => "agentic",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero_shot" => Ok(Condition::ZeroShot),
            "agentic" => Ok(Condition::Agentic),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

/// A model's decision on one question: an option label or an abstention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Answer {
    Option(String),
    Abstain,
}

impl Answer {
    pub fn label(&self) -> Option<&str> {
        match self {
            Answer::Option(l) => Some(l),
            Answer::Abstain => None,
        }
    }

    pub fn is_abstain(&self) -> bool {
        matches!(self, Answer::Abstain)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label().unwrap_or(ABSTAIN))
    }
}

impl From<&str> for Answer {
    fn from(s: &str) -> Self {
        if s == ABSTAIN {
            Answer::Abstain
        } else {
            Answer::Option(s.to_string())
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label().unwrap_or(ABSTAIN))
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Answer::from(s.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub question_id: String,
    pub model_id: String,
    pub condition: Condition,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_tokens: Option<u64>,
}

impl ResponseRecord {
    pub fn new(
        question_id: impl Into<String>,
        model_id: impl Into<String>,
        condition: Condition,
        answer: Answer,
    ) -> Self {
        ResponseRecord {
            question_id: question_id.into(),
            model_id: model_id.into(),
            condition,
            answer,
            raw_text: None,
            reasoning_tokens: None,
            summary_tokens: None,
        }
    }
}

/// The question × model × condition answer record.
///
/// Construction indexes responses but does not validate them; run
/// [`validate_dataset`] (or build through [`crate::ingest::build_matrix`])
/// before analysis. When a triple occurs more than once the first record is
/// the one returned by lookups.
#[derive(Debug, Clone)]
pub struct PanelDataset {
    questions: IndexMap<String, QuestionSpec>,
    models: Vec<String>,
    responses: Vec<ResponseRecord>,
    index: HashMap<(String, String, Condition), usize>,
}

impl PanelDataset {
    pub fn new(questions: IndexMap<String, QuestionSpec>, models: Vec<String>, responses: Vec<ResponseRecord>) -> Self {
        let mut index = HashMap::with_capacity(responses.len());
        for (i, r) in responses.iter().enumerate() {
            index
                .entry((r.question_id.clone(), r.model_id.clone(), r.condition))
                .or_insert(i);
        }
        PanelDataset {
            questions,
            models,
            responses,
            index,
        }
    }

    pub fn questions(&self) -> &IndexMap<String, QuestionSpec> {
        &self.questions
    }

    pub fn question(&self, question_id: &str) -> Option<&QuestionSpec> {
        self.questions.get(question_id)
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn responses(&self) -> &[ResponseRecord] {
        &self.responses
    }

    /// Panel size N.
    pub fn panel_size(&self) -> usize {
        self.models.len()
    }

    pub fn response(&self, question_id: &str, model_id: &str, condition: Condition) -> Option<&ResponseRecord> {
        self.index
            .get(&(question_id.to_string(), model_id.to_string(), condition))
            .map(|&i| &self.responses[i])
    }

    /// The answer of every panel model in panel order; a missing record
    /// reads as [`Answer::Abstain`].
    pub fn answers<'a>(
        &'a self,
        question_id: &'a str,
        condition: Condition,
    ) -> impl Iterator<Item = (&'a str, &'a Answer)> + 'a {
        self.models.iter().map(move |m| {
            let a = self
                .response(question_id, m, condition)
                .map(|r| &r.answer)
                .unwrap_or(&Answer::Abstain);
            (m.as_str(), a)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeverityLevel {
    Low = 0,
    Moderate = 1,
    High = 2,
}

impl SeverityLevel {
    pub const ALL: [SeverityLevel; 3] = [SeverityLevel::Low, SeverityLevel::Moderate, SeverityLevel::High];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(v: u8) -> Option<Self> {
        match v {
            0 => Some(SeverityLevel::Low),
            1 => Some(SeverityLevel::Moderate),
            2 => Some(SeverityLevel::High),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SeverityLevel::Low => "low",
            SeverityLevel::Moderate => "moderate",
            SeverityLevel::High => "high",
        }
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SeverityLevel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(SeverityLevel::Low),
            "moderate" => Ok(SeverityLevel::Moderate),
            "high" => Ok(SeverityLevel::High),
            _ => Err(crate::Error::UnknownSeverity(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityRating {
    pub question_id: String,
    pub option_label: String,
    pub rater_id: String,
    pub severity: SeverityLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Use the `reasoning_tokens` / `summary_tokens` fields as given.
    ExternalCounts,
    /// Count Unicode-whitespace separated tokens of `raw_text`.
    WhitespaceDefault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub bootstrap_reps: usize,
    pub rng_seed: u64,
    pub robustness_bin_edges: (f64, f64),
    /// `(M_min, R_max)` of the high-consensus / low-robustness zone.
    pub anomaly_thresholds: (f64, f64),
    pub wilcoxon_exact_cutoff: usize,
    pub alpha: f64,
    pub tokenizer_mode: TokenizerMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bootstrap_reps: 1000,
            rng_seed: 42,
            robustness_bin_edges: (0.4, 0.8),
            anomaly_thresholds: (0.8, 0.4),
            wilcoxon_exact_cutoff: 25,
            alpha: 0.05,
            tokenizer_mode: TokenizerMode::ExternalCounts,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidConfig(m.to_string()));
        let (lo, hi) = self.robustness_bin_edges;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return bad("robustness bin edges must satisfy 0 < low < high < 1");
        }
        let (m_min, r_max) = self.anomaly_thresholds;
        if !(0.0 < m_min && m_min <= 1.0) {
            return bad("anomaly M threshold must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&r_max) {
            return bad("anomaly R threshold must lie in [0, 1)");
        }
        if self.bootstrap_reps == 0 {
            return bad("bootstrap_reps must be positive");
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    OptionCount,
    DuplicateOption,
    CorrectOptionMissing,
    OptionTextsLength,
    QuestionKeyMismatch,
    PanelTooSmall,
    DuplicateModel,
    UnknownQuestion,
    UnknownModel,
    UnknownOption,
    DuplicateResponse,
    IncompleteTriple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub rule: Rule,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.kind == ViolationKind::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.kind == ViolationKind::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    fn push(&mut self, kind: ViolationKind, rule: Rule, location: String, message: String) {
        self.violations.push(Violation {
            kind,
            rule,
            location,
            message,
        });
    }
}

/// Structural checks of one question spec, shared with the file parser.
pub(crate) fn question_problems(spec: &QuestionSpec) -> Vec<(Rule, String)> {
    let mut out = Vec::new();
    let n = spec.options.len();
    if !(2..=26).contains(&n) {
        out.push((Rule::OptionCount, format!("{n} options (expected 2..=26)")));
    }
    let mut seen = HashSet::new();
    for o in &spec.options {
        if !seen.insert(o.as_str()) {
            out.push((Rule::DuplicateOption, format!("option label {o:?} repeated")));
        }
    }
    if !spec.has_option(&spec.correct_option) {
        out.push((
            Rule::CorrectOptionMissing,
            format!("correct_option {:?} is not among the options", spec.correct_option),
        ));
    }
    if let Some(texts) = &spec.option_texts {
        if texts.len() != n {
            out.push((
                Rule::OptionTextsLength,
                format!("{} option texts for {n} options", texts.len()),
            ));
        }
    }
    out
}

/// Checks every type invariant; missing triples are warnings, everything
/// else is an error. Violations are listed in a deterministic order.
pub fn validate_dataset(dataset: &PanelDataset) -> ValidationReport {
    use ViolationKind::{Error, Warning};
    let mut report = ValidationReport::default();

    for (key, spec) in dataset.questions() {
        let loc = format!("question {key}");
        if key != &spec.question_id {
            report.push(
                Error,
                Rule::QuestionKeyMismatch,
                loc.clone(),
                format!("keyed as {key:?} but question_id is {:?}", spec.question_id),
            );
        }
        for (rule, msg) in question_problems(spec) {
            report.push(Error, rule, loc.clone(), msg);
        }
    }

    if dataset.panel_size() < 2 {
        report.push(
            Error,
            Rule::PanelTooSmall,
            "models".into(),
            format!("panel has {} model(s); at least 2 required", dataset.panel_size()),
        );
    }
    let mut model_set = HashSet::new();
    for m in dataset.models() {
        if !model_set.insert(m.as_str()) {
            report.push(
                Error,
                Rule::DuplicateModel,
                format!("model {m}"),
                "model listed twice".into(),
            );
        }
    }

    let mut seen = HashSet::new();
    for (i, r) in dataset.responses().iter().enumerate() {
        let loc = format!("response #{i} ({}, {}, {})", r.question_id, r.model_id, r.condition);
        match dataset.question(&r.question_id) {
            None => report.push(
                Error,
                Rule::UnknownQuestion,
                loc.clone(),
                format!("unknown question_id {:?}", r.question_id),
            ),
            Some(spec) => {
                if let Answer::Option(label) = &r.answer {
                    if !spec.has_option(label) {
                        report.push(
                            Error,
                            Rule::UnknownOption,
                            loc.clone(),
                            format!("answer {label:?} is not an option of {}", spec.question_id),
                        );
                    }
                }
            }
        }
        if !model_set.contains(r.model_id.as_str()) {
            report.push(
                Error,
                Rule::UnknownModel,
                loc.clone(),
                format!("model {:?} is not in the panel", r.model_id),
            );
        }
        if !seen.insert((r.question_id.as_str(), r.model_id.as_str(), r.condition)) {
            report.push(
                Error,
                Rule::DuplicateResponse,
                loc,
                "duplicate (question, model, condition)".into(),
            );
        }
    }

    for qid in dataset.questions().keys() {
        for m in dataset.models() {
            for c in Condition::ALL {
                if !seen.contains(&(qid.as_str(), m.as_str(), c)) {
                    report.push(
                        Warning,
                        Rule::IncompleteTriple,
                        format!("({qid}, {m}, {c})"),
                        "no response recorded".into(),
                    );
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str, n: usize, correct: &str) -> QuestionSpec {
        QuestionSpec {
            question_id: id.into(),
            dataset_tag: "test".into(),
            options: (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect(),
            option_texts: None,
            correct_option: correct.into(),
        }
    }

    fn complete() -> (IndexMap<String, QuestionSpec>, Vec<String>, Vec<ResponseRecord>) {
        let mut qs = IndexMap::new();
        qs.insert("Q1".to_string(), spec("Q1", 4, "A"));
        qs.insert("Q2".to_string(), spec("Q2", 4, "B"));
        let models = vec!["m1".to_string(), "m2".to_string()];
        let mut rs = Vec::new();
        for q in ["Q1", "Q2"] {
            for m in &models {
                for c in Condition::ALL {
                    rs.push(ResponseRecord::new(q, m.as_str(), c, Answer::from("A")));
                }
            }
        }
        (qs, models, rs)
    }

    #[test]
    fn complete_dataset_is_clean() {
        let (qs, ms, rs) = complete();
        let report = validate_dataset(&PanelDataset::new(qs, ms, rs));
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn unknown_option_is_one_error() {
        let (qs, ms, mut rs) = complete();
        rs[0].answer = Answer::from("E");
        let report = validate_dataset(&PanelDataset::new(qs, ms, rs));
        assert_eq!(report.error_count(), 1);
        assert_eq!(report.violations[0].rule, Rule::UnknownOption);
        assert_eq!(report.warning_count(), 0);
    }

    #[test]
    fn missing_triple_is_one_warning() {
        let (qs, ms, mut rs) = complete();
        let pos = rs
            .iter()
            .position(|r| r.question_id == "Q2" && r.model_id == "m1" && r.condition == Condition::Agentic)
            .unwrap();
        rs.remove(pos);
        let report = validate_dataset(&PanelDataset::new(qs, ms, rs));
        assert_eq!(report.error_count(), 0);
        assert_eq!(report.warning_count(), 1);
        assert_eq!(report.violations[0].rule, Rule::IncompleteTriple);
    }

    #[test]
    fn duplicates_and_bad_specs_are_errors() {
        let (mut qs, ms, mut rs) = complete();
        rs.push(rs[0].clone());
        qs.insert("Q3".into(), spec("Q3", 1, "Z"));
        let report = validate_dataset(&PanelDataset::new(qs, ms, rs));
        let rules: Vec<Rule> = report.errors().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::DuplicateResponse));
        assert!(rules.contains(&Rule::OptionCount));
        assert!(rules.contains(&Rule::CorrectOptionMissing));
    }

    #[test]
    fn validation_is_pure() {
        let (qs, ms, mut rs) = complete();
        rs.pop();
        rs[1].answer = Answer::from("Q");
        let ds = PanelDataset::new(qs, ms, rs);
        assert_eq!(validate_dataset(&ds), validate_dataset(&ds));
    }

    #[test]
    fn config_rejects_inverted_edges() {
        let cfg = AnalysisConfig {
            robustness_bin_edges: (0.8, 0.4),
            ..AnalysisConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(AnalysisConfig::default().validate().is_ok());
    }

    #[test]
    fn severity_ordinals() {
        assert_eq!("Moderate".parse::<SeverityLevel>().unwrap(), SeverityLevel::Moderate);
        assert!("critical".parse::<SeverityLevel>().is_err());
        assert_eq!(SeverityLevel::from_ordinal(2), Some(SeverityLevel::High));
    }
}
