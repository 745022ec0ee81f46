//! Agreement, robustness and statistical analysis of multi-model answer
//! panels on multiple-choice questions.

pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod severity;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

/// Rounds to two decimals, the precision of the published tables.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub type QuestionOutcomeF64 = metrics::QuestionOutcome<f64>;
pub type QuestionPairF64 = metrics::QuestionPair<f64>;
pub type OutcomeTableF64 = metrics::OutcomeTable<f64>;
pub type PairedDeltasF64 = metrics::PairedDeltas<f64>;
pub type AnomalyF64 = metrics::Anomaly<f64>;
pub type StatResultF64 = stats::StatResult<f64>;
pub type BootstrapCIF64 = stats::BootstrapCI<f64>;
pub type FleissKappaF64 = stats::FleissKappa<f64>;
pub type SeverityProfileF64 = severity::SeverityProfile<f64>;
pub type AgreementReportF64 = severity::AgreementReport<f64>;

pub type QuestionOutcomeF32 = metrics::QuestionOutcome<f32>;
pub type StatResultF32 = stats::StatResult<f32>;
