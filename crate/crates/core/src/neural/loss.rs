use crate::scalar::{sigmoid, Scalar};

const CLAMP: f64 = 1e-12;

/// Binary cross-entropy of a probability against a {0,1} label. The score is
/// clamped to `[1e-12, 1 - 1e-12]` so the loss is always finite.
pub fn bce_loss<T: Scalar>(score: T, label: bool) -> T {
    let lo = T::of(CLAMP);
    let p = score.max(lo).min(T::one() - lo);
    if label {
        -p.ln()
    } else {
        -(T::one() - p).ln()
    }
}

/// Loss and its derivative with respect to the logit `z`, where the score is
/// `σ(z)`. The derivative is `σ(z) - t`.
pub fn bce_with_logit<T: Scalar>(z: T, label: bool) -> (T, T) {
    let s = sigmoid(z);
    let t = if label { T::one() } else { T::zero() };
    (bce_loss(s, label), s - t)
}
