//! Metrics and the staged evaluation protocol.

mod metrics;
mod staged;

use thiserror::Error;

pub use metrics::{f_beta, precision_recall_f, rmse, Confusion, PrF};
pub use staged::{
    check_thresholds, stage_tag, staged_evaluation, staged_runs, stats_markdown, Prediction, Report, ReportRow,
    StagedRun, Thresholds, ALL_POSITIVE, DATA, GLOBAL_MEAN, PRIOR_RANDOM,
};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("report csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report csv: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed report: {0}")]
    Format(String),
}
