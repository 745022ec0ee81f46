//! The full analysis in one pass, producing everything the report writes.

use serde::{Deserialize, Serialize};

use crate::metrics::{
    bin_transitions, compute_outcomes, flag_anomalies, paired_deltas, verbosity_samples, Anomaly, BinTransitions,
    Metric, OutcomeTable, PairedDeltas, QuestionOutcome, QuestionPair, ShiftCategory, VerbosityMeasure,
};
use crate::model::{AnalysisConfig, Answer, Condition, PanelDataset, SeverityRating, ValidationReport};
use crate::severity::{
    aggregate_all, link_severity_to_failures, rater_agreement_report, severity_index, severity_profile,
    AggregatedSeverity, AgreementReport, CrossTabRow, FailureCase, FailureSubset, SeverityProfile, POOLED,
};
use crate::stats::descriptive::{mean, median};
use crate::stats::{
    benjamini_hochberg, mann_whitney_u, mcnemar_exact, paired_bootstrap_accuracy, rng::PRNG_ID, spearman_rho,
    wilcoxon_signed_rank, BootstrapCI, StatResult,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub config: AnalysisConfig,
    pub prng: String,
    pub questions: usize,
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSection {
    pub entropy: PairedDeltas<f64>,
    pub majority_fraction: PairedDeltas<f64>,
    pub robustness: PairedDeltas<f64>,
}

impl PairedSection {
    pub fn get(&self, metric: Metric) -> &PairedDeltas<f64> {
        match metric {
            Metric::Entropy => &self.entropy,
            Metric::MajorityFraction => &self.majority_fraction,
            Metric::Robustness => &self.robustness,
        }
    }
}

/// Two-sample descriptive summary attached to unpaired comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label_a: String,
    pub label_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: Option<f64>,
    pub median_b: Option<f64>,
    pub mean_a: Option<f64>,
    pub mean_b: Option<f64>,
}

impl GroupSummary {
    fn new(label_a: &str, a: &[f64], label_b: &str, b: &[f64]) -> Self {
        let some = |xs: &[f64], f: fn(&[f64]) -> f64| (!xs.is_empty()).then(|| f(xs));
        GroupSummary {
            label_a: label_a.into(),
            label_b: label_b.into(),
            n_a: a.len(),
            n_b: b.len(),
            median_a: some(a, median),
            median_b: some(b, median),
            mean_a: some(a, mean),
            mean_b: some(b, mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Computed { result: StatResult<f64> },
    Skipped { reason: String },
}

impl TestOutcome {
    fn from(r: Result<StatResult<f64>>) -> Self {
        match r {
            Ok(result) => TestOutcome::Computed { result },
            Err(e) => TestOutcome::Skipped { reason: e.to_string() },
        }
    }

    pub fn result(&self) -> Option<&StatResult<f64>> {
        match self {
            TestOutcome::Computed { result } => Some(result),
            TestOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    /// Wilcoxon on agentic minus zero-shot deltas.
    PairedShift,
    /// Spearman between M and R across questions.
    Coupling,
    /// Mann-Whitney of M for correct vs incorrect majorities.
    ConsensusByCorrectness,
    /// Mann-Whitney of response length for correct vs incorrect answers.
    Verbosity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub id: String,
    pub family: TestFamily,
    /// A dataset tag or `"pooled"`.
    pub stratum: String,
    pub condition: Option<Condition>,
    /// Metric symbol or verbosity measure.
    pub variable: String,
    pub groups: Option<GroupSummary>,
    pub outcome: TestOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub negative: usize,
    pub positive: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementShiftCounts {
    pub increase_correct: usize,
    pub increase_incorrect: usize,
    pub decrease: usize,
    pub no_change: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionsSection {
    /// Questions with outcomes in both conditions.
    pub paired_questions: usize,
    pub entropy_signs: SignCounts,
    pub agreement_shift: AgreementShiftCounts,
    pub robustness_bins: BinTransitions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeveritySection {
    pub aggregated: Vec<AggregatedSeverity>,
    pub agreement: Option<AgreementReport<f64>>,
    pub profile: SeverityProfile<f64>,
    pub crosstab: Vec<CrossTabRow>,
    pub failures: Vec<FailureCase>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model_id: String,
    pub questions: usize,
    pub zero_shot: BootstrapCI<f64>,
    pub agentic: BootstrapCI<f64>,
    /// Correct only under zero-shot.
    pub discordant_zero_shot: u64,
    /// Correct only under agentic.
    pub discordant_agentic: u64,
    pub mcnemar: StatResult<f64>,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub config_echo: ConfigEcho,
    pub per_question: Vec<QuestionPair<f64>>,
    pub paired: PairedSection,
    pub tests: Vec<TestEntry>,
    pub transitions: TransitionsSection,
    pub anomalies: Vec<Anomaly<f64>>,
    pub severity: Option<SeveritySection>,
    pub per_model: Vec<ModelRow>,
}

fn dataset_tags(dataset: &PanelDataset) -> Vec<String> {
    let mut tags: Vec<String> = Vec::new();
    for q in dataset.questions().values() {
        if !tags.contains(&q.dataset_tag) {
            tags.push(q.dataset_tag.clone());
        }
    }
    tags
}

/// The dataset restricted to one tag.
fn subset(dataset: &PanelDataset, tag: &str) -> PanelDataset {
    let questions = dataset
        .questions()
        .iter()
        .filter(|(_, q)| q.dataset_tag == tag)
        .map(|(k, q)| (k.clone(), q.clone()))
        .collect::<indexmap::IndexMap<_, _>>();
    let responses = dataset
        .responses()
        .iter()
        .filter(|r| questions.contains_key(&r.question_id))
        .cloned()
        .collect();
    PanelDataset::new(questions, dataset.models().to_vec(), responses)
}

fn in_stratum(row: &QuestionPair<f64>, stratum: &str) -> bool {
    stratum == POOLED || row.dataset_tag == stratum
}

fn question_tests(table: &OutcomeTable<f64>, stratum: &str, config: &AnalysisConfig, out: &mut Vec<TestEntry>) {
    let rows: Vec<&QuestionPair<f64>> = table.rows.iter().filter(|r| in_stratum(r, stratum)).collect();
    for metric in Metric::ALL {
        let deltas: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.both())
            .map(|(z, a)| metric.of(a) - metric.of(z))
            .collect();
        out.push(TestEntry {
            id: format!("paired_shift/{}/{stratum}", metric.symbol()),
            family: TestFamily::PairedShift,
            stratum: stratum.into(),
            condition: None,
            variable: metric.symbol().into(),
            groups: None,
            outcome: TestOutcome::from(wilcoxon_signed_rank(&deltas, config.wilcoxon_exact_cutoff)),
        });
    }
    for condition in Condition::ALL {
        let outcomes: Vec<&QuestionOutcome<f64>> = rows.iter().filter_map(|r| r.get(condition)).collect();
        let m: Vec<f64> = outcomes.iter().map(|o| o.majority_fraction).collect();
        let r: Vec<f64> = outcomes.iter().map(|o| o.robustness).collect();
        out.push(TestEntry {
            id: format!("coupling/{condition}/{stratum}"),
            family: TestFamily::Coupling,
            stratum: stratum.into(),
            condition: Some(condition),
            variable: "M~R".into(),
            groups: None,
            outcome: TestOutcome::from(spearman_rho(&m, &r)),
        });
        let (correct, incorrect): (Vec<&QuestionOutcome<f64>>, Vec<&QuestionOutcome<f64>>) =
            outcomes.iter().partition(|o| o.majority_correct);
        let a: Vec<f64> = correct.iter().map(|o| o.majority_fraction).collect();
        let b: Vec<f64> = incorrect.iter().map(|o| o.majority_fraction).collect();
        out.push(TestEntry {
            id: format!("consensus_by_correctness/{condition}/{stratum}"),
            family: TestFamily::ConsensusByCorrectness,
            stratum: stratum.into(),
            condition: Some(condition),
            variable: "M".into(),
            groups: Some(GroupSummary::new("correct", &a, "incorrect", &b)),
            outcome: TestOutcome::from(mann_whitney_u(&a, &b)),
        });
    }
}

fn verbosity_tests(dataset: &PanelDataset, stratum: &str, config: &AnalysisConfig, out: &mut Vec<TestEntry>) {
    for condition in Condition::ALL {
        for measure in VerbosityMeasure::ALL {
            let id = format!("verbosity/{}/{condition}/{stratum}", measure.as_str());
            let (groups, outcome) = match verbosity_samples::<f64>(dataset, condition, measure, config.tokenizer_mode) {
                Ok(s) => (
                    Some(GroupSummary::new("correct", &s.correct, "incorrect", &s.incorrect)),
                    TestOutcome::from(mann_whitney_u(&s.correct, &s.incorrect)),
                ),
                Err(e) => (None, TestOutcome::Skipped { reason: e.to_string() }),
            };
            out.push(TestEntry {
                id,
                family: TestFamily::Verbosity,
                stratum: stratum.into(),
                condition: Some(condition),
                variable: measure.as_str().into(),
                groups,
                outcome,
            });
        }
    }
}

fn transitions(table: &OutcomeTable<f64>, paired: &PairedSection) -> TransitionsSection {
    let mut entropy_signs = SignCounts::default();
    for d in &paired.entropy.deltas {
        match d.shift {
            ShiftCategory::Decrease => entropy_signs.negative += 1,
            ShiftCategory::NoChange => entropy_signs.zero += 1,
            _ => entropy_signs.positive += 1,
        }
    }
    let mut agreement_shift = AgreementShiftCounts::default();
    for d in &paired.majority_fraction.deltas {
        match d.shift {
            ShiftCategory::IncreaseCorrect => agreement_shift.increase_correct += 1,
            ShiftCategory::IncreaseIncorrect => agreement_shift.increase_incorrect += 1,
            ShiftCategory::Decrease => agreement_shift.decrease += 1,
            ShiftCategory::NoChange | ShiftCategory::Increase => agreement_shift.no_change += 1,
        }
    }
    TransitionsSection {
        paired_questions: paired.entropy.deltas.len(),
        entropy_signs,
        agreement_shift,
        robustness_bins: bin_transitions(table),
    }
}

/// The wrong option with the most agentic votes, ties to the listed-first.
fn top_wrong_option(o: &QuestionOutcome<f64>) -> Option<String> {
    o.distribution
        .counts
        .iter()
        .filter(|c| c.label != o.correct_option && c.count > 0)
        .fold(None::<&crate::metrics::OptionCount>, |best, c| match best {
            Some(b) if b.count >= c.count => Some(b),
            _ => Some(c),
        })
        .map(|c| c.label.clone())
}

fn failure_cases(table: &OutcomeTable<f64>, anomalies: &[Anomaly<f64>], paired: &PairedSection) -> Vec<FailureCase> {
    let mut cases = Vec::new();
    for o in table.outcomes().filter(|o| !o.majority_correct) {
        cases.push(FailureCase {
            question_id: o.question_id.clone(),
            condition: o.condition,
            subset: FailureSubset::IncorrectMajority,
            wrong_option: o.modal_option.clone(),
        });
    }
    for a in anomalies {
        cases.push(FailureCase {
            question_id: a.question_id.clone(),
            condition: a.condition,
            subset: FailureSubset::Anomaly,
            wrong_option: a.modal_option.clone(),
        });
    }
    for d in &paired.robustness.deltas {
        if d.shift != ShiftCategory::Decrease {
            continue;
        }
        let row = table.rows.iter().find(|r| r.question_id == d.question_id);
        if let Some(wrong) = row.and_then(|r| r.agentic.as_ref()).and_then(top_wrong_option) {
            cases.push(FailureCase {
                question_id: d.question_id.clone(),
                condition: Condition::Agentic,
                subset: FailureSubset::RobustnessDecrease,
                wrong_option: wrong,
            });
        }
    }
    cases
}

fn severity_section(
    dataset: &PanelDataset,
    ratings: &[SeverityRating],
    failures: Vec<FailureCase>,
) -> Result<SeveritySection> {
    let aggregated = aggregate_all(ratings)?;
    let index = severity_index(&aggregated);
    let mut notes = Vec::new();
    let agreement = match rater_agreement_report::<f64>(ratings) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("rater agreement not computed: {e}"));
            None
        }
    };
    let profile = severity_profile(dataset, &index);
    notes.extend(profile.note.clone());
    let crosstab = link_severity_to_failures(&index, &failures);
    Ok(SeveritySection {
        aggregated,
        agreement,
        profile,
        crosstab,
        failures,
        notes,
    })
}

fn correct_flags(dataset: &PanelDataset, model: &str, condition: Condition) -> Vec<bool> {
    dataset
        .questions()
        .values()
        .map(|q| {
            dataset
                .response(&q.question_id, model, condition)
                .is_some_and(|r| r.answer == Answer::Option(q.correct_option.clone()))
        })
        .collect()
}

fn per_model(dataset: &PanelDataset, config: &AnalysisConfig) -> Result<Vec<ModelRow>> {
    let mut rows = Vec::new();
    for model in dataset.models() {
        let zs = correct_flags(dataset, model, Condition::ZeroShot);
        let ag = correct_flags(dataset, model, Condition::Agentic);
        let boot = paired_bootstrap_accuracy::<f64>(&zs, &ag, config.bootstrap_reps, config.rng_seed)?;
        let b = zs.iter().zip(&ag).filter(|(z, a)| **z && !**a).count() as u64;
        let c = zs.iter().zip(&ag).filter(|(z, a)| !**z && **a).count() as u64;
        rows.push(ModelRow {
            model_id: model.clone(),
            questions: zs.len(),
            zero_shot: boot.zero_shot,
            agentic: boot.agentic,
            discordant_zero_shot: b,
            discordant_agentic: c,
            mcnemar: mcnemar_exact(b, c),
            p_adjusted: 1.0,
        });
    }
    let raw: Vec<f64> = rows.iter().map(|r| r.mcnemar.p_two_sided).collect();
    for (row, p) in rows.iter_mut().zip(benjamini_hochberg(&raw)) {
        row.p_adjusted = p;
    }
    Ok(rows)
}

/// Runs every analysis on the current rayon pool. Output does not depend
/// on the pool size.
pub fn run_analysis(
    dataset: &PanelDataset,
    validation: &ValidationReport,
    severity: Option<&[SeverityRating]>,
    config: &AnalysisConfig,
) -> Result<AnalysisBundle> {
    config.validate()?;
    let table = compute_outcomes::<f64>(dataset, config);
    let paired = PairedSection {
        entropy: paired_deltas(&table, Metric::Entropy),
        majority_fraction: paired_deltas(&table, Metric::MajorityFraction),
        robustness: paired_deltas(&table, Metric::Robustness),
    };
    let tags = dataset_tags(dataset);
    let strata: Vec<&str> = std::iter::once(POOLED).chain(tags.iter().map(String::as_str)).collect();
    let mut tests = Vec::new();
    for s in &strata {
        question_tests(&table, s, config, &mut tests);
    }
    verbosity_tests(dataset, POOLED, config, &mut tests);
    for t in &tags {
        verbosity_tests(&subset(dataset, t), t, config, &mut tests);
    }
    let anomalies = flag_anomalies(table.outcomes(), config);
    let transitions = transitions(&table, &paired);
    let severity = match severity {
        Some(ratings) => Some(severity_section(
            dataset,
            ratings,
            failure_cases(&table, &anomalies, &paired),
        )?),
        None => None,
    };
    let per_model = per_model(dataset, config)?;

    let mut warnings: Vec<String> = validation
        .warnings()
        .map(|v| format!("{}: {}", v.location, v.message))
        .collect();
    warnings.extend(table.warnings.iter().cloned());
    let config_echo = ConfigEcho {
        config: config.clone(),
        prng: PRNG_ID.to_string(),
        questions: dataset.questions().len(),
        models: dataset.models().to_vec(),
        datasets: tags,
        warnings,
    };
    Ok(AnalysisBundle {
        config_echo,
        per_question: table.rows,
        paired,
        tests,
        transitions,
        anomalies,
        severity,
        per_model,
    })
}
