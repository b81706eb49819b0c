//! Ranking and classification metrics over `(score, label)` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mann-Whitney AUC with ties counted as half a pair.
///
/// The count is accumulated as the integer `2·wins + ties`, so the result is
/// exactly `(2·wins + ties) / (2·P·N)` regardless of summation order.
pub fn compute_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (num2, pos, neg) = auc_pair_count(scores, labels)?;
    Ok(num2 as f64 / (2 * pos * neg) as f64)
}

/// `(2·wins + ties, positives, negatives)`.
pub fn auc_pair_count(scores: &[f64], labels: &[bool]) -> Result<(u128, u128, u128)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "compute_auc: {} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Undefined(format!("AUC: score {i} is NaN")));
    }
    let pos = labels.iter().filter(|&&l| l).count() as u128;
    let neg = labels.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined(format!(
            "AUC needs both classes, got {pos} positives and {neg} negatives"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut num2 = 0u128;
    let mut neg_below = 0u128;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut n) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        num2 += 2 * p * neg_below + p * n;
        neg_below += n;
        i = j;
    }
    Ok((num2, pos, neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    /// Predicted positive iff `score ≥ threshold`.
    pub fn at(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.r#fn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.r#fn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// 0 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.r#fn)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.r#fn)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub f1: f64,
    pub recall: f64,
}

pub const TARGET_RECALL: f64 = 0.8;

/// Candidate thresholds: midpoints between consecutive distinct values of
/// `{0} ∪ scores ∪ {1}`, all strictly inside `(0, 1)` for scores in `[0, 1]`.
pub fn threshold_candidates(scores: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = scores.iter().copied().chain([0.0, 1.0]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// θ_F1 maximizes F1; θ_R is the largest candidate with recall ≥ 0.8. Ties
/// go to the larger threshold.
pub fn tune_thresholds(scores: &[f64], labels: &[bool]) -> Result<Thresholds> {
    if scores.is_empty() || !labels.iter().any(|&l| l) {
        return Err(Error::Undefined(
            "threshold tuning needs at least one positive".into(),
        ));
    }
    if scores.len() != labels.len() {
        return Err(Error::Shape("tune_thresholds: length mismatch".into()));
    }
    // Sweep from the top so each step adds the records between two
    // candidates; ties between candidates resolve toward larger θ.
    let candidates = threshold_candidates(scores);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let positives = labels.iter().filter(|&&l| l).count();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut next = 0;
    let mut best_f1 = (-1.0, f64::NAN);
    let mut theta_r = f64::NAN;
    for &theta in candidates.iter().rev() {
        while next < order.len() && scores[order[next]] >= theta {
            if labels[order[next]] {
                tp += 1;
            } else {
                fp += 1;
            }
            next += 1;
        }
        let f1 = 2.0 * tp as f64 / (tp + fp + positives) as f64;
        if f1 > best_f1.0 {
            best_f1 = (f1, theta);
        }
        if theta_r.is_nan() && tp as f64 >= TARGET_RECALL * positives as f64 {
            theta_r = theta;
        }
    }
    if theta_r.is_nan() {
        // Only reachable when positives score exactly 0.
        return Err(Error::Undefined(
            "no threshold in (0, 1) reaches recall 0.8; scores must lie in (0, 1)".into(),
        ));
    }
    Ok(Thresholds {
        f1: best_f1.1,
        recall: theta_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_toy() {
        let s = [0.1, 0.4, 0.6, 0.9];
        let l = [false, false, true, true];
        assert_eq!(compute_auc(&s, &l).unwrap(), 1.0);
        let t = tune_thresholds(&s, &l).unwrap();
        assert!(t.f1 > 0.4 && t.f1 < 0.6);
        assert_eq!(Confusion::at(&s, &l, t.f1).f1(), 1.0);
    }

    #[test]
    fn all_ties_is_half() {
        assert_eq!(compute_auc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(compute_auc(&[0.1, 0.2], &[true, true]), Err(Error::Undefined(_))));
    }

    #[test]
    fn inverted_scores_put_recall_threshold_at_the_bottom() {
        // Positives all below negatives: reaching recall 0.8 admits every
        // negative, so precision falls to the base rate.
        let s = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
        let l = [true, true, true, true, true, false, false, false, false, false];
        let t = tune_thresholds(&s, &l).unwrap();
        assert!(t.recall > 0.1 && t.recall < 0.2, "{t:?}");
        let c = Confusion::at(&s, &l, t.recall);
        assert_eq!(c.recall(), 0.8);
        assert!((c.precision() - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn candidates_stay_strictly_inside_unit_interval() {
        let c = threshold_candidates(&[0.0, 1.0, 0.5]);
        assert_eq!(c, vec![0.25, 0.75]);
    }
}
