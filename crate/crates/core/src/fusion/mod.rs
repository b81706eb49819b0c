//! Late fusion, scoring, operating-point tuning, metrics and the logistic
//! regression baseline.

mod baseline;
mod metrics;
mod report;
mod score;

pub use baseline::{train_lr, LogisticRegression, LrConfig};
pub use metrics::{
    auc_pair_count, compute_auc, threshold_candidates, tune_thresholds, Confusion, Thresholds, TARGET_RECALL,
};
pub use report::{MetricsReport, ReportCounts};
pub use score::{match_score, FusedEmbedding, Mode};
