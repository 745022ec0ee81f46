//! Rule-based extraction of the final stated option from free text.
//!
//! A *label mention* is an alphanumeric token equal (ignoring case) to one
//! of the question's option labels that sits in one of these contexts,
//! checked in order:
//!
//! 1. `answer is X`, `answer: X`, `answer is: X` (optionally `option X`,
//!    `(X`, `**X` after the colon),
//! 2. `option X`,
//! 3. `(X)`,
//! 4. `X)`,
//! 5. `X.` followed by whitespace, a closing quote/bracket, `*`, or the end,
//! 6. `**X**`.
//!
//! A token whose case differs from the label (for example `b` for `B`)
//! additionally must not be followed by a word, so `answer is a benign
//! lesion` does not read as option A.
//!
//! A *text mention* is a case-insensitive, word-bounded occurrence of a full
//! option text. Text mentions nested inside a longer text mention are
//! dropped, as are label mentions that fall inside a text mention.
//!
//! The mention with the largest starting offset decides; on equal offsets a
//! text mention beats a label mention. No mention means ABSTAIN.

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::RawResponse;
use crate::model::{Answer, QuestionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionKind {
    AnswerIs,
    OptionWord,
    Parenthesized,
    ClosingParen,
    Period,
    Bold,
    FullText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mention {
    pub option: String,
    pub kind: MentionKind,
    pub start: usize,
    pub end: usize,
}

fn answer_is_tail() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\banswer\s*(?:is\s*:?|:)\s*(?:option\s*)?[(\[*"']*$"#).expect("valid regex"))
}

fn option_tail() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\boption\s*$").expect("valid regex"))
}

fn label_context(before: &str, after: &str) -> Option<MentionKind> {
    let next = after.chars().next();
    if answer_is_tail().is_match(before) {
        return Some(MentionKind::AnswerIs);
    }
    if option_tail().is_match(before) {
        return Some(MentionKind::OptionWord);
    }
    if before.ends_with('(') && next == Some(')') {
        return Some(MentionKind::Parenthesized);
    }
    if next == Some(')') {
        return Some(MentionKind::ClosingParen);
    }
    if next == Some('.') {
        let follow = after[1..].chars().next();
        if follow.is_none_or(|c| c.is_whitespace() || matches!(c, '*' | '"' | '\'' | ')' | ']')) {
            return Some(MentionKind::Period);
        }
    }
    if before.ends_with("**") && after.starts_with("**") {
        return Some(MentionKind::Bold);
    }
    None
}

fn followed_by_word(after: &str) -> bool {
    after.trim_start().chars().next().is_some_and(|c| c.is_alphabetic())
}

/// Alphanumeric runs as byte ranges.
fn tokens(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, text.len()));
    }
    out
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric())
}

fn text_mentions(text: &str, spec: &QuestionSpec) -> Vec<Mention> {
    let Some(texts) = &spec.option_texts else {
        return Vec::new();
    };
    let mut found = Vec::new();
    for (label, t) in spec.options.iter().zip(texts) {
        let t = t.trim();
        if t.is_empty() {
            continue;
        }
        let re = Regex::new(&format!("(?i){}", regex::escape(t))).expect("escaped literal");
        for m in re.find_iter(text) {
            let before = text[..m.start()].chars().next_back();
            let after = text[m.end()..].chars().next();
            if is_word_char(before) || is_word_char(after) {
                continue;
            }
            found.push(Mention {
                option: label.clone(),
                kind: MentionKind::FullText,
                start: m.start(),
                end: m.end(),
            });
        }
    }
    let nested = |m: &Mention| {
        found
            .iter()
            .any(|o| o.start <= m.start && m.end <= o.end && (o.end - o.start) > (m.end - m.start))
    };
    found.iter().filter(|m| !nested(m)).cloned().collect()
}

/// All recognized mentions in offset order.
pub fn find_mentions(text: &str, spec: &QuestionSpec) -> Vec<Mention> {
    let texts = text_mentions(text, spec);
    let inside_text = |s: usize, e: usize| texts.iter().any(|t| t.start <= s && e <= t.end);

    let mut out = Vec::new();
    for (s, e) in tokens(text) {
        let tok = &text[s..e];
        let Some(label) = spec
            .options
            .iter()
            .find(|l| l.as_str() == tok)
            .or_else(|| spec.options.iter().find(|l| l.eq_ignore_ascii_case(tok)))
        else {
            continue;
        };
        if inside_text(s, e) {
            continue;
        }
        let (before, after) = (&text[..s], &text[e..]);
        let Some(kind) = label_context(before, after) else {
            continue;
        };
        if label.as_str() != tok && followed_by_word(after) {
            continue;
        }
        out.push(Mention {
            option: label.clone(),
            kind,
            start: s,
            end: e,
        });
    }
    out.extend(texts);
    out.sort_by_key(|m| (m.start, m.kind == MentionKind::FullText));
    out
}

/// Returns the last unambiguous option mention of `raw.raw_text`, or
/// ABSTAIN when there is none.
pub fn adjudicate_answer(raw: &RawResponse, spec: &QuestionSpec) -> Answer {
    adjudicate_text(&raw.raw_text, spec)
}

pub(crate) fn adjudicate_text(text: &str, spec: &QuestionSpec) -> Answer {
    if text.trim().is_empty() {
        return Answer::Abstain;
    }
    find_mentions(text, spec)
        .pop()
        .map(|m| Answer::Option(m.option))
        .unwrap_or(Answer::Abstain)
}
