use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous chronological train / validation / test blocks over the
/// review-ordered record list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.test.end
    }

    pub fn is_empty(&self) -> bool {
        self.test.end == 0
    }
}

/// The last `round(test_fraction·N)` records form the test block, the
/// `round(val_fraction·N)` before them the validation block, and the rest is
/// training data. Every block must be non-empty.
pub fn split_chronological(n: usize, val_fraction: f64, test_fraction: f64) -> Result<DatasetSplit> {
    if n < 3 {
        return Err(Error::Config(format!("need at least 3 records to split, got {n}")));
    }
    if !(val_fraction > 0.0 && test_fraction > 0.0 && val_fraction + test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "split fractions must be positive with sum < 1, got {val_fraction} + {test_fraction}"
        )));
    }
    let n_test = (test_fraction * n as f64).round() as usize;
    let n_val = (val_fraction * n as f64).round() as usize;
    if n_test == 0 || n_val == 0 || n_test + n_val >= n {
        return Err(Error::Config(format!(
            "split of {n} records into val={n_val} test={n_test} leaves an empty block"
        )));
    }
    let val_start = n - n_test - n_val;
    Ok(DatasetSplit {
        train: 0..val_start,
        validation: val_start..n - n_test,
        test: n - n_test..n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_records_twenty_percent_blocks() {
        let s = split_chronological(10, 0.2, 0.2).unwrap();
        assert_eq!((s.train, s.validation, s.test), (0..6, 6..8, 8..10));
    }

    #[test]
    fn three_records_one_each() {
        let s = split_chronological(3, 0.34, 0.34).unwrap();
        assert_eq!((s.train, s.validation, s.test), (0..1, 1..2, 2..3));
    }

    #[test]
    fn two_hundred_thousand_holdout_of_1_3m() {
        // 1.3M applications, the last two 100K blocks held out.
        let n = 1_300_000;
        let f = 100_000.0 / n as f64;
        let s = split_chronological(n, f, f).unwrap();
        assert_eq!(s.test.len(), 100_000);
        assert_eq!(s.validation.len(), 100_000);
        assert_eq!(s.train.len(), 1_100_000);
    }

    #[test]
    fn rejects_tiny_corpora_and_bad_fractions() {
        assert!(split_chronological(2, 0.3, 0.3).is_err());
        assert!(split_chronological(10, 0.5, 0.5).is_err());
        assert!(split_chronological(10, 0.0, 0.2).is_err());
    }
}
