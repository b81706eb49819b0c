use super::param::Param;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bias-corrected Adam with classic (coupled) L2 weight decay: the decay term
/// `wd·w` is added to the gradient before the moment updates.
#[derive(Debug, Clone, Copy)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Adam {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }

    /// Updates every parameter from its accumulated gradient. Gradients are
    /// validated before anything is written, so a failure leaves all
    /// parameters untouched.
    pub fn step<T: Scalar>(&self, params: &mut [&mut Param<T>]) -> Result<()> {
        if let Some(bad) = params.iter().find(|p| !p.grad.all_finite()) {
            return Err(Error::NonFiniteGradient {
                param: bad.name.clone(),
            });
        }
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let (lr, eps, wd) = (T::of(self.lr), T::of(self.eps), T::of(self.weight_decay));
        let one = T::one();
        for p in params.iter_mut() {
            p.step += 1;
            let t = p.step as i32;
            let bc1 = one - b1.powi(t);
            let bc2 = one - b2.powi(t);
            let Param {
                value, grad, m, v, ..
            } = &mut **p;
            let w = value.as_mut_slice();
            let g = grad.as_slice();
            let m = m.as_mut_slice();
            let v = v.as_mut_slice();
            for k in 0..w.len() {
                let gk = g[k] + wd * w[k];
                m[k] = b1 * m[k] + (one - b1) * gk;
                v[k] = b2 * v[k] + (one - b2) * gk * gk;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                w[k] = w[k] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::tensor::Tensor;

    fn scalar_param(w: f64) -> Param<f64> {
        Param::new("w", Tensor::from_vec(&[1], vec![w]))
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // t=1: m̂ = g, v̂ = g², so Δw = -lr·g/(|g| + eps).
        let mut p = scalar_param(0.0);
        p.grad.as_mut_slice()[0] = 1.0;
        Adam::new(0.1, 0.0).step(&mut [&mut p]).unwrap();
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((p.value.as_slice()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn no_gradient_no_decay_is_a_no_op() {
        let mut p = scalar_param(1.25);
        Adam::new(0.1, 0.0).step(&mut [&mut p]).unwrap();
        assert_eq!(p.value.as_slice()[0], 1.25);
    }

    #[test]
    fn quadratic_bowl_converges() {
        let mut p = scalar_param(1.0);
        let adam = Adam::new(0.05, 0.0);
        for _ in 0..200 {
            let w = p.value.as_slice()[0];
            p.grad.as_mut_slice()[0] = 2.0 * w;
            adam.step(&mut [&mut p]).unwrap();
        }
        assert!(p.value.as_slice()[0].abs() < 1e-2, "w = {}", p.value.as_slice()[0]);
    }

    #[test]
    fn weight_decay_enters_the_gradient() {
        let mut p = scalar_param(2.0);
        Adam::new(0.1, 0.5).step(&mut [&mut p]).unwrap();
        // g' = 0 + 0.5·2 = 1 > 0, so the first step is -lr.
        assert!((p.value.as_slice()[0] - (2.0 - 0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut a = scalar_param(0.0);
        let mut b = Param::new("tower.head.weight", Tensor::from_vec(&[1], vec![0.0]));
        b.grad.as_mut_slice()[0] = f64::NAN;
        let err = Adam::new(0.1, 0.0).step(&mut [&mut a, &mut b]).unwrap_err();
        assert!(err.to_string().contains("tower.head.weight"));
        assert_eq!(a.step, 0);
    }

    #[test]
    fn identical_inputs_give_bitwise_identical_outputs() {
        let run = || {
            let mut p = scalar_param(0.3);
            for k in 0..10 {
                p.grad.as_mut_slice()[0] = (k as f64).sin();
                Adam::new(0.01, 1e-4).step(&mut [&mut p]).unwrap();
            }
            p.value.as_slice()[0].to_bits()
        };
        assert_eq!(run(), run());
    }
}
