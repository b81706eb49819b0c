//! Factorization-machine terms over a [`SparseFeature`] with exactly `s`
//! active slots.

use crate::error::{Error, Result};
use crate::extraction::SparseFeature;
use crate::neural::{relu, Dense, Tensor};
use crate::scalar::Scalar;

pub(crate) fn check_active(x: &SparseFeature, s: usize, d_x: usize) -> Result<()> {
    if x.active() != s {
        return Err(Error::Shape(format!(
            "sparse input has {} active slots but the tower expects {s}",
            x.active()
        )));
    }
    if let Some(&(i, _)) = x.slots.iter().find(|(i, _)| *i >= d_x) {
        return Err(Error::Shape(format!(
            "sparse index {i} out of bounds for d_x = {d_x}"
        )));
    }
    Ok(())
}

/// `w[idx_j]·val_j` for every active slot, in schema order.
pub fn fm_first_order<T: Scalar>(x: &SparseFeature, w: &[T], s: usize) -> Result<Vec<T>> {
    check_active(x, s, w.len())?;
    Ok(first_order(x, w))
}

pub(crate) fn first_order<T: Scalar>(x: &SparseFeature, w: &[T]) -> Vec<T> {
    x.slots.iter().map(|&(i, v)| w[i] * T::of(v)).collect()
}

/// Slot embeddings `V_i·x_i`, concatenated (length `s·d_fm`).
pub(crate) fn slot_embeddings<T: Scalar>(x: &SparseFeature, v: &Tensor<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(x.slots.len() * v.shape()[1]);
    for &(i, val) in &x.slots {
        out.extend(v.row(i).iter().map(|&e| e * T::of(val)));
    }
    out
}

/// `(Σ a_i)² − Σ a_i²` element-wise, which equals the ordered-pair sum
/// `Σ_{i≠j} a_i ⊙ a_j`.
pub(crate) fn pair_sum<T: Scalar>(a: &[T], d_fm: usize) -> Vec<T> {
    let mut sum = vec![T::zero(); d_fm];
    let mut sq = vec![T::zero(); d_fm];
    for e in a.chunks(d_fm) {
        for k in 0..d_fm {
            sum[k] = sum[k] + e[k];
            sq[k] = sq[k] + e[k] * e[k];
        }
    }
    sum.iter().zip(&sq).map(|(&s, &q)| s * s - q).collect()
}

/// `Σ_{i≠j} (V_i ⊙ V_j) x_i x_j`; `v` is `[d_x, d_fm]`.
pub fn fm_second_order<T: Scalar>(x: &SparseFeature, v: &Tensor<T>, s: usize) -> Result<Vec<T>> {
    check_active(x, s, v.shape()[0])?;
    Ok(pair_sum(&slot_embeddings(x, v), v.shape()[1]))
}

/// Slot embeddings concatenated and passed through the dense+relu stack.
pub fn deep_component<T: Scalar>(
    x: &SparseFeature,
    v: &Tensor<T>,
    blocks: &[Dense<T>],
    s: usize,
) -> Result<Vec<T>> {
    check_active(x, s, v.shape()[0])?;
    let mut h = slot_embeddings(x, v);
    for b in blocks {
        h = relu(&b.forward(&h));
    }
    Ok(h)
}
