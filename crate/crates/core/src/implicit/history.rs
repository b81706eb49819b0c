use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Recruiter decision carried by one history item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
    /// Padding only; real applications are always decided.
    Pad,
}

impl Decision {
    pub fn from_label(label: bool) -> Self {
        if label {
            Decision::Accept
        } else {
            Decision::Reject
        }
    }

    /// `10`, `01` or `00`.
    pub fn onehot(self) -> [f64; 2] {
        match self {
            Decision::Accept => [1.0, 0.0],
            Decision::Reject => [0.0, 1.0],
            Decision::Pad => [0.0, 0.0],
        }
    }

    pub fn from_onehot(bits: [f64; 2]) -> Option<Self> {
        match bits {
            [1.0, 0.0] => Some(Decision::Accept),
            [0.0, 1.0] => Some(Decision::Reject),
            [0.0, 0.0] => Some(Decision::Pad),
            _ => None,
        }
    }
}

/// One past application before encoding: `f_E` of the resume, `g_E` of the
/// post and the decision.
#[derive(Debug, Clone, Copy)]
pub struct HistoryEntry<'a, T: Scalar = f64> {
    pub resume: &'a [T],
    pub post: &'a [T],
    pub decision: Decision,
}

/// Width of an encoded item for explicit embeddings of length `d_e`.
pub fn item_width(d_e: usize) -> usize {
    2 * d_e + 2
}

/// `[f_E(r); onehot(t); g_E(p)]`.
pub fn encode_item<T: Scalar>(entry: &HistoryEntry<'_, T>) -> Vec<T> {
    let mut v = Vec::with_capacity(entry.resume.len() + entry.post.len() + 2);
    v.extend_from_slice(entry.resume);
    v.extend(entry.decision.onehot().map(T::of));
    v.extend_from_slice(entry.post);
    v
}

/// Fixed-length LSTM input from a chronological history: the most recent
/// `max_len` entries, left-padded with all-zero items.
///
/// Panics if an entry's embeddings are not both of length `d_e`.
pub fn encode_history<T: Scalar>(entries: &[HistoryEntry<'_, T>], d_e: usize, max_len: usize) -> Vec<Vec<T>> {
    let kept = &entries[entries.len().saturating_sub(max_len)..];
    let mut out = vec![vec![T::zero(); item_width(d_e)]; max_len - kept.len()];
    for e in kept {
        assert!(
            e.resume.len() == d_e && e.post.len() == d_e,
            "encode_history: embeddings of length {}/{} but d_E = {d_e}",
            e.resume.len(),
            e.post.len()
        );
        out.push(encode_item(e));
    }
    out
}
