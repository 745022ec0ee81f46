//! Input files: questions, responses, raw responses (JSON Lines) and
//! severity ratings (CSV).
//!
//! Every JSON Lines file holds one object per line; blank lines are skipped.
//! Line numbers in errors are 1-based.

mod adjudicate;

pub use adjudicate::{adjudicate_answer, find_mentions, Mention, MentionKind};

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{
    question_problems, validate_dataset, Answer, Condition, PanelDataset, QuestionSpec, ResponseRecord, SeverityLevel,
    SeverityRating, ValidationReport,
};
use crate::{Error, Result};

/// A free-text model output awaiting adjudication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub question_id: String,
    pub model_id: String,
    pub condition: Condition,
    pub raw_text: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn jsonl<T: DeserializeOwned>(text: &str, file: &str) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Malformed {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

pub fn parse_questions(path: impl AsRef<Path>) -> Result<IndexMap<String, QuestionSpec>> {
    let path = path.as_ref();
    parse_questions_str(&read(path)?, &path.display().to_string())
}

pub fn parse_questions_str(text: &str, file: &str) -> Result<IndexMap<String, QuestionSpec>> {
    let mut map = IndexMap::new();
    for (line, spec) in jsonl::<QuestionSpec>(text, file)? {
        if let Some((_, msg)) = question_problems(&spec).into_iter().next() {
            return Err(Error::Malformed {
                file: file.to_string(),
                line,
                message: format!("question {:?}: {msg}", spec.question_id),
            });
        }
        if map.contains_key(&spec.question_id) {
            return Err(Error::DuplicateQuestion(spec.question_id));
        }
        map.insert(spec.question_id.clone(), spec);
    }
    Ok(map)
}

pub fn parse_responses(
    path: impl AsRef<Path>,
    questions: &IndexMap<String, QuestionSpec>,
) -> Result<Vec<ResponseRecord>> {
    let path = path.as_ref();
    parse_responses_str(&read(path)?, &path.display().to_string(), questions)
}

pub fn parse_responses_str(
    text: &str,
    file: &str,
    questions: &IndexMap<String, QuestionSpec>,
) -> Result<Vec<ResponseRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, rec) in jsonl::<ResponseRecord>(text, file)? {
        let spec = questions
            .get(&rec.question_id)
            .ok_or_else(|| Error::UnknownQuestion(rec.question_id.clone()))?;
        if let Answer::Option(label) = &rec.answer {
            if !spec.has_option(label) {
                return Err(Error::UnknownOption {
                    question_id: rec.question_id.clone(),
                    option: label.clone(),
                });
            }
        }
        if !seen.insert((rec.question_id.clone(), rec.model_id.clone(), rec.condition)) {
            return Err(Error::DuplicateResponse {
                question_id: rec.question_id,
                model_id: rec.model_id,
                condition: rec.condition.to_string(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_raw_responses(path: impl AsRef<Path>) -> Result<Vec<RawResponse>> {
    let path = path.as_ref();
    parse_raw_responses_str(&read(path)?, &path.display().to_string())
}

pub fn parse_raw_responses_str(text: &str, file: &str) -> Result<Vec<RawResponse>> {
    Ok(jsonl::<RawResponse>(text, file)?.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Deserialize)]
struct SeverityRow {
    question_id: String,
    option_label: String,
    rater_id: String,
    severity: String,
}

pub fn parse_severity(
    path: impl AsRef<Path>,
    questions: &IndexMap<String, QuestionSpec>,
) -> Result<Vec<SeverityRating>> {
    let path = path.as_ref();
    parse_severity_str(&read(path)?, questions)
}

pub fn parse_severity_str(text: &str, questions: &IndexMap<String, QuestionSpec>) -> Result<Vec<SeverityRating>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in reader.deserialize::<SeverityRow>() {
        let row = row?;
        let spec = questions
            .get(&row.question_id)
            .ok_or_else(|| Error::UnknownQuestion(row.question_id.clone()))?;
        if !spec.has_option(&row.option_label) {
            return Err(Error::UnknownOption {
                question_id: row.question_id,
                option: row.option_label,
            });
        }
        if row.option_label == spec.correct_option {
            return Err(Error::RatingOnCorrectOption {
                question_id: row.question_id,
                option: row.option_label,
            });
        }
        let severity: SeverityLevel = row.severity.parse()?;
        if !seen.insert((row.question_id.clone(), row.option_label.clone(), row.rater_id.clone())) {
            return Err(Error::DuplicateRating {
                question_id: row.question_id,
                option_label: row.option_label,
                rater_id: row.rater_id,
            });
        }
        out.push(SeverityRating {
            question_id: row.question_id,
            option_label: row.option_label,
            rater_id: row.rater_id,
            severity,
        });
    }
    Ok(out)
}

/// Assembles the panel. Without an explicit `models` list the panel is the
/// distinct `model_id`s in order of first appearance.
pub fn build_matrix(
    questions: IndexMap<String, QuestionSpec>,
    responses: Vec<ResponseRecord>,
    models: Option<Vec<String>>,
) -> Result<(PanelDataset, ValidationReport)> {
    if questions.is_empty() {
        return Err(Error::NoQuestions);
    }
    let models = models.unwrap_or_else(|| {
        let mut seen = HashSet::new();
        responses
            .iter()
            .filter(|r| seen.insert(r.model_id.as_str()))
            .map(|r| r.model_id.clone())
            .collect()
    });
    if models.is_empty() {
        return Err(Error::NoModels);
    }
    let dataset = PanelDataset::new(questions, models, responses);
    let report = validate_dataset(&dataset);
    Ok((dataset, report))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, &item)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn write_questions<'a>(
    path: impl AsRef<Path>,
    questions: impl IntoIterator<Item = &'a QuestionSpec>,
) -> Result<()> {
    write_jsonl(path.as_ref(), questions)
}

pub fn write_responses<'a>(
    path: impl AsRef<Path>,
    responses: impl IntoIterator<Item = &'a ResponseRecord>,
) -> Result<()> {
    write_jsonl(path.as_ref(), responses)
}
