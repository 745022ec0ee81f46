//! Seeded synthetic panels with a shared-attractor coordination model.
//!
//! Zero-shot: model `m` answers question `q` correctly with probability
//! `clamp(s_m (1 - d_q) + floor, 0, 1)`, otherwise picks a wrong option
//! uniformly. Agentic: each question draws an attractor that is the correct
//! option with probability `1 - γ` and a uniform wrong option otherwise;
//! every model follows it with probability `c` and otherwise answers from a
//! fresh zero-shot draw.

pub mod oracle;

use std::path::Path;

use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Answer, Condition, PanelDataset, QuestionSpec, ResponseRecord};
use crate::stats::rng::{stream, uniform01, uniform_index, Stream};
use crate::{Error, Result};

/// Stream index reserved for per-model parameters, clear of question indices.
const MODEL_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Skills {
    /// One skill per model.
    Values(Vec<f64>),
    /// Drawn uniformly from `[low, high)`.
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Constant(f64),
    /// One difficulty per question.
    Values(Vec<f64>),
    /// Drawn per question from Beta(alpha, beta).
    Beta {
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub questions: usize,
    pub models: usize,
    pub options: usize,
    pub skills: Skills,
    pub difficulty: Difficulty,
    /// Added to the zero-shot success probability before clamping.
    pub floor: f64,
    /// Probability a model follows the agentic attractor.
    pub coordination: f64,
    /// Probability the agentic attractor is a wrong option.
    pub misleading_rate: f64,
    pub seed: u64,
    pub dataset_tag: String,
    /// Attach synthetic reasoning and summary token counts.
    pub token_counts: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            questions: 169,
            models: 34,
            options: 4,
            skills: Skills::Uniform { low: 0.55, high: 0.95 },
            difficulty: Difficulty::Beta { alpha: 2.0, beta: 5.0 },
            floor: 0.1,
            coordination: 0.9,
            misleading_rate: 0.05,
            seed: 42,
            dataset_tag: "sim".to_string(),
            token_counts: true,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.questions == 0 || self.models == 0 || self.options == 0 {
            return Err(Error::InvalidConfig(
                "questions, models and options must be at least 1".into(),
            ));
        }
        if self.options > 26 {
            return Err(Error::InvalidConfig(format!(
                "at most 26 options, got {}",
                self.options
            )));
        }
        unit("floor", self.floor)?;
        unit("coordination", self.coordination)?;
        unit("misleading_rate", self.misleading_rate)?;
        if self.misleading_rate > 0.0 && self.options < 2 {
            return Err(Error::InvalidConfig(
                "misleading_rate > 0 needs at least 2 options".into(),
            ));
        }
        match &self.skills {
            Skills::Values(v) => {
                if v.len() != self.models {
                    return Err(Error::InvalidConfig(format!(
                        "{} skills for {} models",
                        v.len(),
                        self.models
                    )));
                }
                v.iter().try_for_each(|&s| unit("skill", s))?;
            }
            Skills::Uniform { low, high } => {
                unit("skill low", *low)?;
                unit("skill high", *high)?;
                if low > high {
                    return Err(Error::InvalidConfig("skill low exceeds high".into()));
                }
            }
        }
        match &self.difficulty {
            Difficulty::Constant(d) => unit("difficulty", *d)?,
            Difficulty::Values(v) => {
                if v.len() != self.questions {
                    return Err(Error::InvalidConfig(format!(
                        "{} difficulties for {} questions",
                        v.len(),
                        self.questions
                    )));
                }
                v.iter().try_for_each(|&d| unit("difficulty", d))?;
            }
            Difficulty::Beta { alpha, beta } => {
                if !(*alpha > 0.0 && *beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::InvalidConfig("beta parameters must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn option_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| char::from(b'A' + i as u8).to_string()).collect()
}

fn model_skills(cfg: &SimConfig) -> Vec<f64> {
    match &cfg.skills {
        Skills::Values(v) => v.clone(),
        Skills::Uniform { low, high } => {
            let mut rng = stream(cfg.seed, MODEL_STREAM);
            (0..cfg.models)
                .map(|_| low + (high - low) * uniform01(&mut rng))
                .collect()
        }
    }
}

/// A wrong option index chosen uniformly.
fn wrong_option(rng: &mut Stream, k: usize, correct: usize) -> usize {
    let j = uniform_index(rng, k - 1);
    if j >= correct {
        j + 1
    } else {
        j
    }
}

fn zero_shot_draw(rng: &mut Stream, p_correct: f64, k: usize, correct: usize) -> usize {
    if k == 1 || uniform01(rng) < p_correct {
        correct
    } else {
        wrong_option(rng, k, correct)
    }
}

fn simulate_question(
    cfg: &SimConfig,
    skills: &[f64],
    labels: &[String],
    q: usize,
) -> (QuestionSpec, Vec<ResponseRecord>) {
    let mut rng = stream(cfg.seed, q as u64);
    let k = cfg.options;
    let d = match &cfg.difficulty {
        Difficulty::Constant(d) => *d,
        Difficulty::Values(v) => v[q],
        Difficulty::Beta { alpha, beta } => Beta::new(*alpha, *beta).expect("validated").sample(&mut rng),
    };
    let correct = uniform_index(&mut rng, k);
    let attractor = if k > 1 && uniform01(&mut rng) < cfg.misleading_rate {
        wrong_option(&mut rng, k, correct)
    } else {
        correct
    };
    let qid = format!("q{:04}", q + 1);
    let mut records = Vec::with_capacity(2 * cfg.models);
    for (m, &s) in skills.iter().enumerate() {
        let p = (s * (1.0 - d) + cfg.floor).clamp(0.0, 1.0);
        let zs = zero_shot_draw(&mut rng, p, k, correct);
        let ag = if uniform01(&mut rng) < cfg.coordination {
            attractor
        } else {
            zero_shot_draw(&mut rng, p, k, correct)
        };
        for (condition, choice) in [(Condition::ZeroShot, zs), (Condition::Agentic, ag)] {
            let mut r = ResponseRecord::new(
                qid.clone(),
                model_id(m),
                condition,
                Answer::Option(labels[choice].clone()),
            );
            if cfg.token_counts {
                let reasoning = 40 + uniform_index(&mut rng, 400) as u64;
                let summary = 10 + uniform_index(&mut rng, 120) as u64;
                r.reasoning_tokens = Some(reasoning);
                r.summary_tokens = Some(summary);
            }
            records.push(r);
        }
    }
    let spec = QuestionSpec {
        question_id: qid,
        dataset_tag: cfg.dataset_tag.clone(),
        options: labels.to_vec(),
        option_texts: None,
        correct_option: labels[correct].clone(),
    };
    (spec, records)
}

pub fn model_id(m: usize) -> String {
    format!("m{:02}", m + 1)
}

/// Both conditions for every question and model. Each question draws from
/// its own stream, so the result does not depend on the rayon pool size.
pub fn simulate_panel(cfg: &SimConfig) -> Result<PanelDataset> {
    cfg.validate()?;
    let skills = model_skills(cfg);
    let labels = option_labels(cfg.options);
    let per_question: Vec<(QuestionSpec, Vec<ResponseRecord>)> = (0..cfg.questions)
        .into_par_iter()
        .map(|q| simulate_question(cfg, &skills, &labels, q))
        .collect();
    let mut questions = indexmap::IndexMap::with_capacity(cfg.questions);
    let mut responses = Vec::with_capacity(cfg.questions * cfg.models * 2);
    for (spec, records) in per_question {
        responses.extend(records);
        questions.insert(spec.question_id.clone(), spec);
    }
    Ok(PanelDataset::new(
        questions,
        (0..cfg.models).map(model_id).collect(),
        responses,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{compute_outcomes, flag_anomalies};
    use crate::model::AnalysisConfig;

    fn cfg(c: f64, gamma: f64) -> SimConfig {
        SimConfig {
            questions: 40,
            models: 12,
            coordination: c,
            misleading_rate: gamma,
            ..SimConfig::default()
        }
    }

    #[test]
    fn full_coordination_on_truth() {
        let ds = simulate_panel(&cfg(1.0, 0.0)).unwrap();
        let table = compute_outcomes::<f64>(&ds, &AnalysisConfig::default());
        for o in table.outcomes_for(Condition::Agentic) {
            assert_eq!((o.entropy, o.robustness), (0.0, 1.0));
        }
    }

    #[test]
    fn forced_collapse_is_flagged_everywhere() {
        let ds = simulate_panel(&cfg(1.0, 1.0)).unwrap();
        let table = compute_outcomes::<f64>(&ds, &AnalysisConfig::default());
        let ag: Vec<_> = table.outcomes_for(Condition::Agentic).collect();
        assert!(ag.iter().all(|o| o.majority_fraction == 1.0 && o.robustness == 0.0));
        let flags = flag_anomalies(ag.iter().copied(), &AnalysisConfig::default());
        assert_eq!(flags.len(), 40);
    }

    #[test]
    fn same_seed_same_panel() {
        let a = simulate_panel(&cfg(0.5, 0.2)).unwrap();
        let b = simulate_panel(&cfg(0.5, 0.2)).unwrap();
        assert_eq!(a.responses(), b.responses());
        let c = simulate_panel(&SimConfig {
            seed: 7,
            ..cfg(0.5, 0.2)
        })
        .unwrap();
        assert_ne!(a.responses(), c.responses());
    }

    #[test]
    fn zero_shot_marginal_accuracy() {
        let q = 10_000;
        let cfg = SimConfig {
            questions: q,
            models: 2,
            options: 4,
            skills: Skills::Values(vec![0.8, 0.4]),
            difficulty: Difficulty::Constant(0.25),
            floor: 0.05,
            coordination: 0.0,
            token_counts: false,
            ..SimConfig::default()
        };
        let ds = simulate_panel(&cfg).unwrap();
        for (m, want) in [("m01", 0.8 * 0.75 + 0.05), ("m02", 0.4 * 0.75 + 0.05)] {
            let hits = ds
                .questions()
                .values()
                .filter(|s| {
                    ds.response(&s.question_id, m, Condition::ZeroShot).unwrap().answer
                        == Answer::Option(s.correct_option.clone())
                })
                .count();
            let acc = hits as f64 / q as f64;
            let se = (want * (1.0 - want) / q as f64).sqrt();
            assert!((acc - want).abs() < 3.0 * se, "{m}: {acc} vs {want}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig {
            options: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            coordination: 1.5,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            skills: Skills::Values(vec![0.5]),
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig::from_json(r#"{"questions": 5, "skills": {"uniform": {"low": 0.2, "high": 0.9}}}"#).is_ok());
        assert!(SimConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
