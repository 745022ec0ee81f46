use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Malformed { file: String, line: usize, message: String },

    #[error("duplicate question_id {0:?}")]
    DuplicateQuestion(String),

    #[error("duplicate response for ({question_id}, {model_id}, {condition})")]
    DuplicateResponse {
        question_id: String,
        model_id: String,
        condition: String,
    },

    #[error("duplicate severity rating for ({question_id}, {option_label}, {rater_id})")]
    DuplicateRating {
        question_id: String,
        option_label: String,
        rater_id: String,
    },

    #[error("unknown question_id {0:?}")]
    UnknownQuestion(String),

    #[error("option {option:?} is not an option of question {question_id:?}")]
    UnknownOption { question_id: String, option: String },

    #[error("invalid question {question_id:?}: {message}")]
    InvalidQuestion { question_id: String, message: String },

    #[error("severity rating targets the correct option {option:?} of question {question_id:?}")]
    RatingOnCorrectOption { question_id: String, option: String },

    #[error("unknown severity {0:?} (expected low, moderate or high)")]
    UnknownSeverity(String),

    #[error("dataset has no models")]
    NoModels,

    #[error("dataset has no questions")]
    NoQuestions,

    #[error("input contains no records")]
    EmptyInput,

    #[error("no decisions to analyze for question {0:?}")]
    NoDecisions(String),

    #[error("no non-zero pairs")]
    NoNonZeroPairs,

    #[error("rank correlation undefined")]
    RankCorrelationUndefined,

    #[error("kappa undefined")]
    KappaUndefined,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ragged rating coverage: {0}")]
    RaggedCoverage(String),

    #[error("{0} too large for exhaustive enumeration")]
    TooLarge(&'static str),

    #[error("nothing to plot")]
    NothingToPlot,

    #[error("unknown chart kind {0:?}")]
    UnknownChart(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
