mod common;

use common::{expand, model_ids, spec, PanelBuilder, LABELS};
use panelrel::metrics::{
    answer_distribution, compute_outcomes, decision_entropy, flag_anomalies, in_anomaly_zone, majority, robustness,
    AnswerDistribution, OptionCount,
};
use panelrel::model::{AnalysisConfig, Answer, Condition, PanelDataset, ResponseRecord, SeverityLevel};
use panelrel::severity::aggregate_option_severity;
use panelrel::simulator::{simulate_panel, SimConfig};
use panelrel::stats::bootstrap::paired_bootstrap_accuracy;
use panelrel::stats::mann_whitney::{cliffs_delta, mann_whitney_u};
use panelrel::stats::mcnemar::mcnemar_exact;
use panelrel::stats::spearman::spearman_rho;
use panelrel::stats::wilcoxon::wilcoxon_signed_rank;
use proptest::prelude::*;

fn small_panel(seed: u64, questions: usize, models: usize) -> PanelDataset {
    simulate_panel(&SimConfig {
        questions,
        models,
        coordination: 0.5,
        misleading_rate: 0.3,
        seed,
        ..SimConfig::default()
    })
    .unwrap()
}

fn metrics(ds: &PanelDataset) -> Vec<(String, Condition, f64, f64, f64)> {
    let table = compute_outcomes::<f64>(ds, &AnalysisConfig::default());
    table
        .outcomes()
        .map(|o| {
            (
                o.question_id.clone(),
                o.condition,
                o.entropy,
                o.majority_fraction,
                o.robustness,
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relabeling_models_keeps_metrics(seed in 0u64..1000, rotate in 1usize..9) {
        let ds = small_panel(seed, 12, 9);
        let rename = |m: &str| {
            let i: usize = m[1..].parse().unwrap();
            format!("model-{}", (i + rotate) % 9)
        };
        let responses: Vec<ResponseRecord> = ds
            .responses()
            .iter()
            .rev()
            .map(|r| ResponseRecord { model_id: rename(&r.model_id), ..r.clone() })
            .collect();
        let mut models: Vec<String> = ds.models().iter().map(|m| rename(m)).collect();
        models.reverse();
        let relabeled = PanelDataset::new(ds.questions().clone(), models, responses);
        prop_assert_eq!(metrics(&ds), metrics(&relabeled));
    }

    #[test]
    fn split_panel_counts_recombine(seed in 0u64..1000, cut in 1usize..10) {
        let ds = small_panel(seed, 8, 10);
        let (left, right) = ds.models().split_at(cut);
        let half = |ids: &[String]| {
            let keep: Vec<ResponseRecord> =
                ds.responses().iter().filter(|r| ids.contains(&r.model_id)).cloned().collect();
            PanelDataset::new(ds.questions().clone(), ids.to_vec(), keep)
        };
        let (a, b) = (half(left), half(right));
        for qid in ds.questions().keys() {
            for cond in Condition::ALL {
                let full = answer_distribution(&ds, qid, cond).unwrap();
                let parts = [&a, &b].map(|h| {
                    let counts: Vec<usize> = ds.questions()[qid]
                        .options
                        .iter()
                        .map(|l| h.answers(qid, cond).filter(|(_, x)| x.label() == Some(l)).count())
                        .collect();
                    counts
                });
                let merged = AnswerDistribution {
                    question_id: qid.clone(),
                    condition: cond,
                    counts: full
                        .counts
                        .iter()
                        .enumerate()
                        .map(|(i, c)| OptionCount { label: c.label.clone(), count: parts[0][i] + parts[1][i] })
                        .collect(),
                    abstain_count: full.abstain_count,
                    responders: parts[0].iter().chain(&parts[1]).sum(),
                };
                prop_assert_eq!(&merged, &full);
                prop_assert_eq!(decision_entropy::<f64>(&merged), decision_entropy::<f64>(&full));
                prop_assert_eq!(majority::<f64>(&merged), majority::<f64>(&full));
                let (ca, _) = robustness::<f64>(&a, qid, cond).unwrap();
                let (cb, _) = robustness::<f64>(&b, qid, cond).unwrap();
                let (cf, rf) = robustness::<f64>(&ds, qid, cond).unwrap();
                prop_assert_eq!(ca + cb, cf);
                prop_assert_eq!(rf, cf as f64 / ds.panel_size() as f64);
            }
        }
    }

    #[test]
    fn robustness_ignores_which_wrong_option(wrong in proptest::collection::vec(1usize..4, 10), correct in 0usize..10) {
        let answers = |pick: &dyn Fn(usize) -> usize| -> Vec<Answer> {
            (0..10)
                .map(|i| Answer::Option(LABELS[if i < correct { 0 } else { pick(i) }].to_string()))
                .collect()
        };
        let mut b = PanelBuilder::new(10);
        b.question(spec("q", "t", "A"), answers(&|i| wrong[i]), answers(&|_| 1));
        let ds = b.build();
        let (zs, ag) = (
            robustness::<f64>(&ds, "q", Condition::ZeroShot).unwrap(),
            robustness::<f64>(&ds, "q", Condition::Agentic).unwrap(),
        );
        prop_assert_eq!(zs, ag);
        prop_assert_eq!(zs.0, correct);
    }

    #[test]
    fn anomalies_are_the_threshold_filter(
        counts in proptest::collection::vec((0usize..7, 0usize..7), 1..30),
        m_min in 0.5f64..1.0,
        r_max in 0.0f64..0.6,
    ) {
        let mut b = PanelBuilder::new(6);
        for (i, &(a, bb)) in counts.iter().enumerate() {
            let a = a.min(6);
            let bb = bb.min(6 - a);
            let rest = 6 - a - bb;
            let zs = expand(&[("A", a), ("B", bb), ("C", rest)]);
            let ag = expand(&[("B", rest), ("A", 6 - rest)]);
            b.question(spec(&format!("q{i:02}"), "t", "A"), zs, ag);
        }
        let config = AnalysisConfig { anomaly_thresholds: (m_min, r_max), ..AnalysisConfig::default() };
        let table = compute_outcomes::<f64>(&b.build(), &config);
        let flagged: Vec<(String, Condition)> =
            flag_anomalies(table.outcomes(), &config).into_iter().map(|a| (a.question_id, a.condition)).collect();
        let brute: Vec<(String, Condition)> = table
            .outcomes()
            .filter(|o| o.majority_fraction >= m_min && o.robustness < r_max)
            .map(|o| (o.question_id.clone(), o.condition))
            .collect();
        prop_assert_eq!(&flagged, &brute);
        for o in table.outcomes() {
            prop_assert_eq!(in_anomaly_zone(o.majority_fraction, o.robustness, (m_min, r_max)), brute.contains(&(o.question_id.clone(), o.condition)));
        }
    }

    #[test]
    fn wilcoxon_negation(d in proptest::collection::vec(-20i32..20, 1..40)) {
        let d: Vec<f64> = d.into_iter().map(|x| x as f64 / 4.0).collect();
        prop_assume!(d.iter().any(|&x| x != 0.0));
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let (a, b) = (wilcoxon_signed_rank::<f64>(&d, 25).unwrap(), wilcoxon_signed_rank::<f64>(&neg, 25).unwrap());
        prop_assert_eq!(a.effect_size, -b.effect_size);
        prop_assert!((a.p_two_sided - b.p_two_sided).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.p_two_sided));
    }

    #[test]
    fn mann_whitney_swap_and_delta_identity(
        a in proptest::collection::hash_set(0u32..1000, 1..15),
        b in proptest::collection::hash_set(1000u32..2000, 1..15),
        shift in 0u32..1500,
    ) {
        // distinct values across both samples keep the data tie-free
        let mut a: Vec<f64> = a.into_iter().map(|x| x as f64).collect();
        let mut b: Vec<f64> = b.into_iter().map(|x| x as f64 - shift as f64 + 0.5).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let x = mann_whitney_u::<f64>(&a, &b).unwrap();
        let y = mann_whitney_u::<f64>(&b, &a).unwrap();
        prop_assert_eq!(x.effect_size, -y.effect_size);
        prop_assert!((x.p_two_sided - y.p_two_sided).abs() <= 1e-12);
        let from_u = 2.0 * x.statistic / (a.len() * b.len()) as f64 - 1.0;
        prop_assert!((from_u - cliffs_delta(&a, &b).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn spearman_monotone_invariance(
        xy in proptest::collection::vec((-50i32..50, -50i32..50), 3..25),
    ) {
        let x: Vec<f64> = xy.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1 as f64).collect();
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let base = spearman_rho::<f64>(&x, &y).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v + 3.0).collect();
        let moved = spearman_rho::<f64>(&tx, &ty).unwrap();
        prop_assert!((base.statistic - moved.statistic).abs() <= 1e-12);
        prop_assert!((base.p_two_sided - moved.p_two_sided).abs() <= 1e-12);
        let swapped = spearman_rho::<f64>(&y, &x).unwrap();
        prop_assert!((base.statistic - swapped.statistic).abs() <= 1e-12);
    }

    #[test]
    fn mcnemar_symmetry(b in 0u64..3000, c in 0u64..3000) {
        let (x, y) = (mcnemar_exact::<f64>(b, c), mcnemar_exact::<f64>(c, b));
        prop_assert_eq!(x.p_two_sided, y.p_two_sided);
        prop_assert_eq!(x.effect_size, -y.effect_size);
        prop_assert!((0.0..=1.0).contains(&x.p_two_sided));
    }

    #[test]
    fn severity_aggregation_ignores_rater_order(
        levels in proptest::collection::vec(0u8..3, 2..7),
        rotate in 0usize..7,
    ) {
        let ratings: Vec<(String, SeverityLevel)> = levels
            .iter()
            .enumerate()
            .map(|(i, &l)| (format!("r{i}"), SeverityLevel::from_ordinal(l).unwrap()))
            .collect();
        let mut rotated = ratings.clone();
        rotated.rotate_left(rotate % ratings.len());
        rotated.reverse();
        let a = aggregate_option_severity("q", "B", &ratings).unwrap();
        let b = aggregate_option_severity("q", "B", &rotated).unwrap();
        prop_assert_eq!(a.aggregate, b.aggregate);
        prop_assert_eq!(a.rule_used, b.rule_used);
    }
}

#[test]
fn bootstrap_sd_matches_binomial_standard_error() {
    let q = 169;
    let flags: Vec<bool> = (0..q).map(|i| i * 31 % q < 120).collect();
    let acc = 120.0 / q as f64;
    let boot = paired_bootstrap_accuracy::<f64>(&flags, &flags, 20_000, 99).unwrap();
    let want = (acc * (1.0 - acc) / q as f64).sqrt();
    let rel = (boot.zero_shot.sd - want).abs() / want;
    assert!(rel < 0.10, "sd {} vs {want}", boot.zero_shot.sd);
}

#[test]
fn missing_records_read_as_abstentions() {
    let mut b = PanelBuilder::new(4);
    b.question(
        spec("q", "t", "A"),
        expand(&[("A", 2), ("B", 1), ("ABSTAIN", 1)]),
        expand(&[("A", 4)]),
    );
    let full = b.build();
    let dropped: Vec<ResponseRecord> = full
        .responses()
        .iter()
        .filter(|r| !(r.condition == Condition::ZeroShot && r.answer.is_abstain()))
        .cloned()
        .collect();
    let sparse = PanelDataset::new(full.questions().clone(), model_ids(4), dropped);
    assert_eq!(metrics(&full), metrics(&sparse));
}
