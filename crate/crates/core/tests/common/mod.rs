#![allow(dead_code)]

use indexmap::IndexMap;
use panelrel::model::{Answer, Condition, PanelDataset, QuestionSpec, ResponseRecord};

pub const LABELS: [&str; 4] = ["A", "B", "C", "D"];

pub fn spec(id: &str, tag: &str, correct: &str) -> QuestionSpec {
    QuestionSpec {
        question_id: id.to_string(),
        dataset_tag: tag.to_string(),
        options: LABELS.map(String::from).to_vec(),
        option_texts: None,
        correct_option: correct.to_string(),
    }
}

/// Expands `[("A", 3), ("B", 1)]` into per-model answers; `"ABSTAIN"`
/// counts become abstentions.
pub fn expand(counts: &[(&str, usize)]) -> Vec<Answer> {
    counts
        .iter()
        .flat_map(|&(label, n)| {
            std::iter::repeat_n(
                if label == "ABSTAIN" {
                    Answer::Abstain
                } else {
                    Answer::Option(label.to_string())
                },
                n,
            )
        })
        .collect()
}

pub fn model_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("m{i:02}")).collect()
}

/// Full panel dataset from per-question answer lists, one answer per model
/// in model order.
#[derive(Default)]
pub struct PanelBuilder {
    questions: IndexMap<String, QuestionSpec>,
    responses: Vec<ResponseRecord>,
    models: usize,
}

impl PanelBuilder {
    pub fn new(models: usize) -> Self {
        PanelBuilder {
            models,
            ..Default::default()
        }
    }

    pub fn question(&mut self, spec: QuestionSpec, zero_shot: Vec<Answer>, agentic: Vec<Answer>) -> &mut Self {
        assert_eq!(zero_shot.len(), self.models, "{} zero-shot answers", spec.question_id);
        assert_eq!(agentic.len(), self.models, "{} agentic answers", spec.question_id);
        let ids = model_ids(self.models);
        for (cond, answers) in [(Condition::ZeroShot, zero_shot), (Condition::Agentic, agentic)] {
            for (m, a) in ids.iter().zip(answers) {
                self.responses
                    .push(ResponseRecord::new(spec.question_id.clone(), m.clone(), cond, a));
            }
        }
        self.questions.insert(spec.question_id.clone(), spec);
        self
    }

    pub fn build(&self) -> PanelDataset {
        PanelDataset::new(self.questions.clone(), model_ids(self.models), self.responses.clone())
    }
}
