use serde::{Deserialize, Serialize};

use super::metrics::{compute_auc, tune_thresholds, Confusion, Thresholds};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub validation: usize,
    pub test: usize,
    pub test_positives: usize,
    /// Test confusion at θ_F1.
    pub at_f1: Confusion,
    /// Test confusion at θ_R.
    pub at_recall: Confusion,
}

/// Test-set metrics at operating points tuned on validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub auc: f64,
    /// At θ_F1.
    pub accuracy: f64,
    /// At θ_F1.
    pub f1: f64,
    /// At θ_R.
    pub precision_at_recall_0_8: f64,
    pub thresholds: Thresholds,
    pub counts: ReportCounts,
    pub config_hash: String,
}

impl MetricsReport {
    /// Thresholds come from the validation scores only; every reported
    /// number is computed on the test scores.
    pub fn from_scores(
        model: &str,
        validation: (&[f64], &[bool]),
        test: (&[f64], &[bool]),
        config_hash: String,
    ) -> Result<Self> {
        let (vs, vl) = validation;
        let (ts, tl) = test;
        if vs.len() != vl.len() || ts.len() != tl.len() {
            return Err(Error::Shape("metrics report: score and label counts differ".into()));
        }
        let thresholds = tune_thresholds(vs, vl)?;
        let auc = compute_auc(ts, tl)?;
        let at_f1 = Confusion::at(ts, tl, thresholds.f1);
        let at_recall = Confusion::at(ts, tl, thresholds.recall);
        Ok(MetricsReport {
            model: model.to_string(),
            auc,
            accuracy: at_f1.accuracy(),
            f1: at_f1.f1(),
            precision_at_recall_0_8: at_recall.precision(),
            thresholds,
            counts: ReportCounts {
                validation: vs.len(),
                test: ts.len(),
                test_positives: tl.iter().filter(|&&l| l).count(),
                at_f1,
                at_recall,
            },
            config_hash,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One fixed-width table row.
    pub fn table_row(&self) -> String {
        format!(
            "{:<14} {:>7.4} {:>9.4} {:>7.4} {:>9.4}",
            self.model, self.auc, self.accuracy, self.f1, self.precision_at_recall_0_8
        )
    }

    pub fn table_header() -> String {
        format!("{:<14} {:>7} {:>9} {:>7} {:>9}", "model", "AUC", "accuracy", "F1", "P@R=0.8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_sum_to_test_size_and_metrics_are_bounded() {
        let vs = [0.1, 0.4, 0.6, 0.9, 0.3];
        let vl = [false, false, true, true, false];
        let ts = [0.2, 0.7, 0.5, 0.95, 0.05, 0.65];
        let tl = [false, true, false, true, false, false];
        let r = MetricsReport::from_scores("m", (&vs, &vl), (&ts, &tl), "h".into()).unwrap();
        assert_eq!(r.counts.at_f1.total(), ts.len());
        assert_eq!(r.counts.at_recall.total(), ts.len());
        for v in [r.auc, r.accuracy, r.f1, r.precision_at_recall_0_8] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(r.thresholds.f1 > 0.4 && r.thresholds.f1 < 0.6);
    }
}
