//! Clinical severity of wrong options: aggregation across raters, rater
//! agreement, severity profiles of incorrect outputs, and failure cross-tabs.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::metrics::severity_entropy;
use crate::model::{Answer, Condition, PanelDataset, SeverityLevel, SeverityRating};
use crate::stats::kappa::{fleiss_kappa, per_item_agreement, FleissKappa};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    StrictMajority,
    OrdinalMedian,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedSeverity {
    pub question_id: String,
    pub option_label: String,
    /// `(rater_id, label)` sorted by rater.
    pub ratings: Vec<(String, SeverityLevel)>,
    pub aggregate: SeverityLevel,
    pub rule_used: AggregationRule,
}

/// Strict majority label if one exists, else the median ordinal. An even
/// rater count whose median falls between two levels takes the higher one.
pub fn aggregate_option_severity(
    question_id: &str,
    option_label: &str,
    ratings: &[(String, SeverityLevel)],
) -> Result<AggregatedSeverity> {
    let r = ratings.len();
    if r < 2 {
        return Err(Error::InsufficientData(format!(
            "{question_id}/{option_label}: severity aggregation needs at least 2 ratings, got {r}"
        )));
    }
    let mut counts = [0usize; 3];
    for (_, l) in ratings {
        counts[l.ordinal() as usize] += 1;
    }
    let majority = SeverityLevel::ALL
        .into_iter()
        .find(|l| 2 * counts[l.ordinal() as usize] > r);
    let (aggregate, rule_used) = match majority {
        Some(l) => (l, AggregationRule::StrictMajority),
        None => {
            let mut ord: Vec<u8> = ratings.iter().map(|(_, l)| l.ordinal()).collect();
            ord.sort_unstable();
            let upper = ord[r / 2];
            (
                SeverityLevel::from_ordinal(upper).expect("valid ordinal"),
                AggregationRule::OrdinalMedian,
            )
        }
    };
    let mut sorted = ratings.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(AggregatedSeverity {
        question_id: question_id.to_string(),
        option_label: option_label.to_string(),
        ratings: sorted,
        aggregate,
        rule_used,
    })
}

/// Groups ratings by option, ordered by question id then option label.
fn group_ratings(ratings: &[SeverityRating]) -> BTreeMap<(String, String), Vec<(String, SeverityLevel)>> {
    let mut groups: BTreeMap<(String, String), Vec<(String, SeverityLevel)>> = BTreeMap::new();
    for r in ratings {
        groups
            .entry((r.question_id.clone(), r.option_label.clone()))
            .or_default()
            .push((r.rater_id.clone(), r.severity));
    }
    groups
}

pub fn aggregate_all(ratings: &[SeverityRating]) -> Result<Vec<AggregatedSeverity>> {
    group_ratings(ratings)
        .iter()
        .map(|((q, o), rs)| aggregate_option_severity(q, o, rs))
        .collect()
}

/// Lookup from `(question_id, option_label)` to the aggregate label.
pub type SeverityIndex = IndexMap<(String, String), SeverityLevel>;

pub fn severity_index(aggregated: &[AggregatedSeverity]) -> SeverityIndex {
    aggregated
        .iter()
        .map(|a| ((a.question_id.clone(), a.option_label.clone()), a.aggregate))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStratum {
    ZeroShot,
    Agentic,
    Both,
}

impl ConditionStratum {
    pub const ALL: [ConditionStratum; 3] = [
        ConditionStratum::ZeroShot,
        ConditionStratum::Agentic,
        ConditionStratum::Both,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionStratum::ZeroShot => "zero_shot",
            ConditionStratum::Agentic => "agentic",
            ConditionStratum::Both => "both",
        }
    }

    fn includes(self, c: Condition) -> bool {
        match self {
            ConditionStratum::ZeroShot => c == Condition::ZeroShot,
            ConditionStratum::Agentic => c == Condition::Agentic,
            ConditionStratum::Both => true,
        }
    }
}

/// Incorrect outputs of one stratum by the severity of the chosen option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStratum<F> {
    /// A dataset tag, or `"pooled"`.
    pub dataset: String,
    pub condition: ConditionStratum,
    pub incorrect: usize,
    pub low: usize,
    pub moderate: usize,
    pub high: usize,
    /// Incorrect outputs whose chosen option carries no annotation.
    pub unannotated: usize,
    /// Shares of annotated incorrect outputs; absent when there are none.
    pub proportions: Option<[F; 3]>,
}

impl<F: Real> ProfileStratum<F> {
    fn new(dataset: &str, condition: ConditionStratum) -> Self {
        ProfileStratum {
            dataset: dataset.to_string(),
            condition,
            incorrect: 0,
            low: 0,
            moderate: 0,
            high: 0,
            unannotated: 0,
            proportions: None,
        }
    }

    fn add(&mut self, level: Option<SeverityLevel>) {
        self.incorrect += 1;
        match level {
            Some(SeverityLevel::Low) => self.low += 1,
            Some(SeverityLevel::Moderate) => self.moderate += 1,
            Some(SeverityLevel::High) => self.high += 1,
            None => self.unannotated += 1,
        }
    }

    pub fn annotated(&self) -> usize {
        self.low + self.moderate + self.high
    }

    fn finish(&mut self) {
        let n = self.annotated();
        if n > 0 {
            let nf = F::from_count(n);
            self.proportions = Some([
                F::from_count(self.low) / nf,
                F::from_count(self.moderate) / nf,
                F::from_count(self.high) / nf,
            ]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityProfile<F> {
    /// Pooled strata first, then dataset tags in question order.
    pub strata: Vec<ProfileStratum<F>>,
    pub note: Option<String>,
}

impl<F> SeverityProfile<F> {
    pub fn get(&self, dataset: &str, condition: ConditionStratum) -> Option<&ProfileStratum<F>> {
        self.strata
            .iter()
            .find(|s| s.dataset == dataset && s.condition == condition)
    }
}

pub const POOLED: &str = "pooled";

/// Each incorrect, non-abstaining model answer inherits the aggregate
/// severity of the option it chose.
pub fn severity_profile<F: Real>(dataset: &PanelDataset, severities: &SeverityIndex) -> SeverityProfile<F> {
    let mut tags: Vec<&str> = vec![POOLED];
    for q in dataset.questions().values() {
        if !tags.contains(&q.dataset_tag.as_str()) {
            tags.push(&q.dataset_tag);
        }
    }
    let mut strata: Vec<ProfileStratum<F>> = tags
        .iter()
        .flat_map(|t| ConditionStratum::ALL.map(|c| ProfileStratum::new(t, c)))
        .collect();
    for (qid, spec) in dataset.questions() {
        for condition in Condition::ALL {
            for model in dataset.models() {
                let Some(r) = dataset.response(qid, model, condition) else {
                    continue;
                };
                let Answer::Option(chosen) = &r.answer else { continue };
                if *chosen == spec.correct_option {
                    continue;
                }
                let level = severities.get(&(qid.clone(), chosen.clone())).copied();
                for s in strata.iter_mut() {
                    if (s.dataset == POOLED || s.dataset == spec.dataset_tag) && s.condition.includes(condition) {
                        s.add(level);
                    }
                }
            }
        }
    }
    strata.iter_mut().for_each(ProfileStratum::finish);
    let none = strata.iter().all(|s| s.incorrect == 0);
    SeverityProfile {
        strata,
        note: none.then(|| "no incorrect outputs".to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementLevel {
    Unanimous,
    Majority,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionAgreement<F> {
    pub question_id: String,
    pub option_label: String,
    /// Rater counts for low, moderate, high.
    pub counts: [usize; 3],
    pub p_i: F,
    pub level: AgreementLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionAgreement<F> {
    pub question_id: String,
    pub options: usize,
    /// Mean `P_i` over the question's options.
    pub observed: F,
    pub expected: F,
    /// Undefined when every rating of the question falls in one category.
    pub kappa: Option<F>,
    /// Entropy of the aggregate labels across the question's options.
    pub severity_entropy: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport<F> {
    pub raters: Vec<String>,
    pub options: usize,
    /// Share of options on which a strict majority of raters agree.
    pub percent_agreement: F,
    pub unanimous: usize,
    pub majority: usize,
    pub no_consensus: usize,
    pub fleiss: Option<FleissKappa<F>>,
    pub per_option: Vec<OptionAgreement<F>>,
    pub per_question: Vec<QuestionAgreement<F>>,
}

/// Agreement statistics over options rated by the same full rater set.
pub fn rater_agreement_report<F: Real>(ratings: &[SeverityRating]) -> Result<AgreementReport<F>> {
    let groups = group_ratings(ratings);
    let mut rater_sets = groups
        .values()
        .map(|rs| rs.iter().map(|(r, _)| r.clone()).collect::<BTreeSet<_>>());
    let raters = rater_sets
        .next()
        .ok_or_else(|| Error::InsufficientData("no severity ratings".into()))?;
    for ((q, o), rs) in &groups {
        let set: BTreeSet<String> = rs.iter().map(|(r, _)| r.clone()).collect();
        if set != raters || rs.len() != raters.len() {
            return Err(Error::RaggedCoverage(format!(
                "{q}/{o} rated by {} of {} raters",
                set.len(),
                raters.len()
            )));
        }
    }
    let n = raters.len();
    if n < 2 {
        return Err(Error::InsufficientData("agreement needs at least 2 raters".into()));
    }

    let mut per_option = Vec::with_capacity(groups.len());
    let (mut unanimous, mut majority, mut no_consensus) = (0, 0, 0);
    for ((q, o), rs) in &groups {
        let mut counts = [0usize; 3];
        for (_, l) in rs {
            counts[l.ordinal() as usize] += 1;
        }
        let top = *counts.iter().max().expect("three levels");
        let level = if top == n {
            unanimous += 1;
            AgreementLevel::Unanimous
        } else if 2 * top > n {
            majority += 1;
            AgreementLevel::Majority
        } else {
            no_consensus += 1;
            AgreementLevel::None
        };
        per_option.push(OptionAgreement {
            question_id: q.clone(),
            option_label: o.clone(),
            counts,
            p_i: per_item_agreement(&counts, n)?,
            level,
        });
    }

    let aggregated = aggregate_all(ratings)?;
    let mut per_question = Vec::new();
    let mut start = 0;
    while start < per_option.len() {
        let qid = &per_option[start].question_id;
        let end = start + per_option[start..].iter().take_while(|a| &a.question_id == qid).count();
        let table: Vec<Vec<usize>> = per_option[start..end].iter().map(|a| a.counts.to_vec()).collect();
        let labels: Vec<SeverityLevel> = aggregated[start..end].iter().map(|a| a.aggregate).collect();
        let (observed, expected, kappa) = match fleiss_kappa::<F>(&table) {
            Ok(k) => (k.p_bar, k.p_e, Some(k.kappa)),
            Err(Error::KappaUndefined) => (F::one(), F::one(), None),
            Err(e) => return Err(e),
        };
        per_question.push(QuestionAgreement {
            question_id: qid.clone(),
            options: end - start,
            observed,
            expected,
            kappa,
            severity_entropy: severity_entropy(&labels)?,
        });
        start = end;
    }

    let table: Vec<Vec<usize>> = per_option.iter().map(|a| a.counts.to_vec()).collect();
    let fleiss = match fleiss_kappa::<F>(&table) {
        Ok(k) => Some(k),
        Err(Error::KappaUndefined) => None,
        Err(e) => return Err(e),
    };
    let options = per_option.len();
    Ok(AgreementReport {
        raters: raters.into_iter().collect(),
        options,
        percent_agreement: F::from_count(unanimous + majority) / F::from_count(options),
        unanimous,
        majority,
        no_consensus,
        fleiss,
        per_option,
        per_question,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureSubset {
    /// Majority option is wrong.
    IncorrectMajority,
    /// High consensus with low robustness.
    Anomaly,
    /// Robustness fell from zero-shot to agentic.
    RobustnessDecrease,
}

impl FailureSubset {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureSubset::IncorrectMajority => "incorrect_majority",
            FailureSubset::Anomaly => "anomaly",
            FailureSubset::RobustnessDecrease => "robustness_decrease",
        }
    }
}

/// A failing question/condition pair and the wrong option the panel most
/// often chose there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCase {
    pub question_id: String,
    pub condition: Condition,
    pub subset: FailureSubset,
    pub wrong_option: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTabRow {
    pub subset: FailureSubset,
    pub condition: Condition,
    pub low: usize,
    pub moderate: usize,
    pub high: usize,
    pub unannotated: usize,
}

impl CrossTabRow {
    pub fn count(&self, level: SeverityLevel) -> usize {
        match level {
            SeverityLevel::Low => self.low,
            SeverityLevel::Moderate => self.moderate,
            SeverityLevel::High => self.high,
        }
    }
}

/// Failure subset × severity counts, one row per `(subset, condition)` that
/// has at least one case, ordered by subset then condition.
pub fn link_severity_to_failures(severities: &SeverityIndex, failures: &[FailureCase]) -> Vec<CrossTabRow> {
    let mut rows: BTreeMap<(FailureSubset, Condition), CrossTabRow> = BTreeMap::new();
    for f in failures {
        let row = rows.entry((f.subset, f.condition)).or_insert(CrossTabRow {
            subset: f.subset,
            condition: f.condition,
            low: 0,
            moderate: 0,
            high: 0,
            unannotated: 0,
        });
        match severities.get(&(f.question_id.clone(), f.wrong_option.clone())) {
            Some(SeverityLevel::Low) => row.low += 1,
            Some(SeverityLevel::Moderate) => row.moderate += 1,
            Some(SeverityLevel::High) => row.high += 1,
            None => row.unannotated += 1,
        }
    }
    rows.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QuestionSpec, ResponseRecord};
    use SeverityLevel::*;

    fn rs(levels: &[SeverityLevel]) -> Vec<(String, SeverityLevel)> {
        levels.iter().enumerate().map(|(i, &l)| (format!("r{i}"), l)).collect()
    }

    fn rating(q: &str, o: &str, r: &str, s: SeverityLevel) -> SeverityRating {
        SeverityRating {
            question_id: q.into(),
            option_label: o.into(),
            rater_id: r.into(),
            severity: s,
        }
    }

    #[test]
    fn aggregation_rules() {
        let a = aggregate_option_severity("q", "B", &rs(&[Moderate, Moderate, High])).unwrap();
        assert_eq!((a.aggregate, a.rule_used), (Moderate, AggregationRule::StrictMajority));
        let a = aggregate_option_severity("q", "B", &rs(&[Low, Moderate, High])).unwrap();
        assert_eq!((a.aggregate, a.rule_used), (Moderate, AggregationRule::OrdinalMedian));
        let a = aggregate_option_severity("q", "B", &rs(&[High, High, High])).unwrap();
        assert_eq!(a.aggregate, High);
        assert!(aggregate_option_severity("q", "B", &rs(&[High])).is_err());
    }

    #[test]
    fn even_rater_median_rounds_up() {
        let a = aggregate_option_severity("q", "B", &rs(&[Low, High])).unwrap();
        assert_eq!((a.aggregate, a.rule_used), (High, AggregationRule::OrdinalMedian));
        let a = aggregate_option_severity("q", "B", &rs(&[Low, Low, Moderate, High])).unwrap();
        assert_eq!(a.aggregate, Moderate);
    }

    #[test]
    fn three_rater_median_only_when_all_differ() {
        for a in SeverityLevel::ALL {
            for b in SeverityLevel::ALL {
                for c in SeverityLevel::ALL {
                    let agg = aggregate_option_severity("q", "B", &rs(&[a, b, c])).unwrap();
                    let distinct = a != b && b != c && a != c;
                    assert_eq!(agg.rule_used == AggregationRule::OrdinalMedian, distinct);
                    if distinct {
                        assert_eq!(agg.aggregate, Moderate);
                    }
                    let rev = aggregate_option_severity("q", "B", &rs(&[c, b, a])).unwrap();
                    assert_eq!(rev.aggregate, agg.aggregate);
                }
            }
        }
    }

    #[test]
    fn agreement_buckets() {
        let ratings = vec![
            rating("q1", "B", "x", High),
            rating("q1", "B", "y", High),
            rating("q1", "B", "z", High),
            rating("q1", "C", "x", High),
            rating("q1", "C", "y", High),
            rating("q1", "C", "z", Low),
            rating("q2", "A", "x", Low),
            rating("q2", "A", "y", Moderate),
            rating("q2", "A", "z", High),
        ];
        let rep = rater_agreement_report::<f64>(&ratings).unwrap();
        assert_eq!((rep.unanimous, rep.majority, rep.no_consensus), (1, 1, 1));
        assert!((rep.percent_agreement - 2.0 / 3.0).abs() < 1e-15);
        let p: Vec<f64> = rep.per_option.iter().map(|o| o.p_i).collect();
        assert_eq!(p[0], 1.0);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        assert_eq!(rep.per_question.len(), 2);
        assert!((rep.per_question[0].observed - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unanimous_report() {
        let ratings: Vec<SeverityRating> = ["B", "C"]
            .iter()
            .zip([Low, High])
            .flat_map(|(o, l)| ["x", "y", "z"].map(|r| rating("q", o, r, l)))
            .collect();
        let rep = rater_agreement_report::<f64>(&ratings).unwrap();
        assert_eq!(rep.percent_agreement, 1.0);
        assert_eq!(rep.unanimous, 2);
        assert_eq!(rep.fleiss.unwrap().kappa, 1.0);
    }

    #[test]
    fn ragged_coverage_rejected() {
        let ratings = vec![
            rating("q", "B", "x", Low),
            rating("q", "B", "y", Low),
            rating("q", "C", "x", Low),
        ];
        assert!(matches!(
            rater_agreement_report::<f64>(&ratings),
            Err(Error::RaggedCoverage(_))
        ));
    }

    fn small_dataset() -> PanelDataset {
        let q = |id: &str, tag: &str| QuestionSpec {
            question_id: id.into(),
            dataset_tag: tag.into(),
            options: vec!["A".into(), "B".into(), "C".into()],
            option_texts: None,
            correct_option: "A".into(),
        };
        let r = |q: &str, m: &str, c: Condition, a: &str| ResponseRecord::new(q, m, c, Answer::from(a));
        PanelDataset::new(
            [q("q1", "bench"), q("q2", "board")]
                .into_iter()
                .map(|q| (q.question_id.clone(), q))
                .collect(),
            vec!["m1".into(), "m2".into()],
            vec![
                r("q1", "m1", Condition::ZeroShot, "B"),
                r("q1", "m2", Condition::ZeroShot, "A"),
                r("q1", "m1", Condition::Agentic, "C"),
                r("q1", "m2", Condition::Agentic, "B"),
                r("q2", "m1", Condition::ZeroShot, "ABSTAIN"),
                r("q2", "m2", Condition::ZeroShot, "C"),
                r("q2", "m1", Condition::Agentic, "A"),
                r("q2", "m2", Condition::Agentic, "A"),
            ],
        )
    }

    #[test]
    fn profile_strata() {
        let ds = small_dataset();
        let mut idx = SeverityIndex::new();
        idx.insert(("q1".into(), "B".into()), Moderate);
        idx.insert(("q1".into(), "C".into()), High);
        let p = severity_profile::<f64>(&ds, &idx);
        let both = p.get(POOLED, ConditionStratum::Both).unwrap();
        assert_eq!(
            (both.incorrect, both.low, both.moderate, both.high, both.unannotated),
            (4, 0, 2, 1, 1)
        );
        let props = both.proportions.unwrap();
        assert!((props.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let zs = p.get("bench", ConditionStratum::ZeroShot).unwrap();
        assert_eq!((zs.incorrect, zs.moderate), (1, 1));
        let board = p.get("board", ConditionStratum::Agentic).unwrap();
        assert_eq!(board.incorrect, 0);
        assert!(board.proportions.is_none());
        assert!(p.note.is_none());
    }

    #[test]
    fn profile_counts_to_proportions() {
        let mut s = ProfileStratum::<f64>::new(POOLED, ConditionStratum::Both);
        for (l, k) in [(Low, 160), (Moderate, 240), (High, 172)] {
            (0..k).for_each(|_| s.add(Some(l)));
        }
        s.finish();
        let p = s.proportions.unwrap().map(crate::round2);
        assert_eq!(p, [0.28, 0.42, 0.30]);
    }

    #[test]
    fn cross_tab() {
        let mut idx = SeverityIndex::new();
        idx.insert(("a".into(), "B".into()), Low);
        idx.insert(("b".into(), "C".into()), Moderate);
        idx.insert(("c".into(), "D".into()), Moderate);
        idx.insert(("d".into(), "B".into()), High);
        let case = |q: &str, o: &str, s| FailureCase {
            question_id: q.into(),
            condition: Condition::Agentic,
            subset: s,
            wrong_option: o.into(),
        };
        let rows = link_severity_to_failures(
            &idx,
            &[
                case("a", "B", FailureSubset::RobustnessDecrease),
                case("b", "C", FailureSubset::RobustnessDecrease),
                case("c", "D", FailureSubset::RobustnessDecrease),
                case("d", "B", FailureSubset::Anomaly),
            ],
        );
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].subset, rows[0].high), (FailureSubset::Anomaly, 1));
        assert_eq!((rows[1].low, rows[1].moderate, rows[1].high), (1, 2, 0));
        assert!(link_severity_to_failures(&idx, &[]).is_empty());
    }
}
