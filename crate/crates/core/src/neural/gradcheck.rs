//! Central finite-difference gradient checking.
//!
//! The checker only ever calls [`GradCheckable::loss`] for the numeric side,
//! so it is independent of the backward code it is validating.

use super::param::Param;
use crate::scalar::Scalar;

/// A model fragment with a scalar loss.
pub trait GradCheckable<T: Scalar> {
    fn params_mut(&mut self) -> Vec<&mut Param<T>>;

    /// Forward pass only.
    fn loss(&self) -> T;

    /// Forward and backward; gradients are accumulated into the parameters.
    fn loss_and_grad(&mut self) -> T;
}

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.max_rel_error < self.tolerance)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_error).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

/// Denominator floor for the relative error. Central differences with
/// `h = 1e-5` carry absolute noise around `1e-10`, so gradients smaller than
/// this are compared absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares analytic gradients with `(L(w+h) - L(w-h)) / 2h` for every
/// element of every parameter.
pub fn grad_check<T, M>(model: &mut M, h: f64, tolerance: f64) -> GradCheckReport
where
    T: Scalar,
    M: GradCheckable<T> + ?Sized,
{
    for p in model.params_mut() {
        p.zero_grad();
    }
    model.loss_and_grad();
    let analytic: Vec<(String, Vec<f64>)> = model
        .params_mut()
        .iter()
        .map(|p| {
            (
                p.name.clone(),
                p.grad.as_slice().iter().map(|g| g.to_f64_lossless()).collect(),
            )
        })
        .collect();

    let mut report = GradCheckReport {
        tolerance,
        params: Vec::with_capacity(analytic.len()),
    };
    for (pi, (name, grads)) in analytic.into_iter().enumerate() {
        let mut check = ParamCheck {
            name,
            max_rel_error: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for (k, &a) in grads.iter().enumerate() {
            let orig = model.params_mut()[pi].value.as_slice()[k];
            model.params_mut()[pi].value.as_mut_slice()[k] = orig + T::of(h);
            let up = model.loss().to_f64_lossless();
            model.params_mut()[pi].value.as_mut_slice()[k] = orig - T::of(h);
            let down = model.loss().to_f64_lossless();
            model.params_mut()[pi].value.as_mut_slice()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(a, numeric);
            if err > check.max_rel_error || k == 0 {
                check.max_rel_error = err;
                check.worst_index = k;
                check.analytic = a;
                check.numeric = numeric;
            }
        }
        report.params.push(check);
    }
    report
}

/// Single-layer fragments with a random linear read-out `loss = r·layer(x)`,
/// with the layer input itself registered as a parameter so input gradients
/// are checked too.
pub mod probes {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::GradCheckable;
    use crate::neural::conv::{max_pool2d, max_pool2d_backward, Conv2d};
    use crate::neural::layers::{relu, relu_backward, Dense, Embedding};
    use crate::neural::loss::bce_with_logit;
    use crate::neural::lstm::{LstmCell, LstmState};
    use crate::neural::param::{Module, Param};
    use crate::neural::tensor::Tensor;
    use crate::scalar::{dot, Scalar};

    fn readout<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
        (0..n).map(|_| T::of(rng.random_range(-1.0..1.0))).collect()
    }

    pub struct DenseProbe<T: Scalar = f64> {
        pub layer: Dense<T>,
        pub input: Param<T>,
        pub relu: bool,
        readout: Vec<T>,
    }

    impl<T: Scalar> DenseProbe<T> {
        pub fn new(fan_in: usize, fan_out: usize, relu: bool, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DenseProbe {
                layer: Dense::new("dense", fan_in, fan_out, &mut rng),
                input: Param::uniform("input", &[fan_in], 1.0, &mut rng),
                relu,
                readout: readout(fan_out, &mut rng),
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for DenseProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            let mut p = self.layer.params_mut();
            p.push(&mut self.input);
            p
        }

        fn loss(&self) -> T {
            let y = self.layer.forward(self.input.value.as_slice());
            let y = if self.relu { relu(&y) } else { y };
            dot(&y, &self.readout)
        }

        fn loss_and_grad(&mut self) -> T {
            let x = self.input.value.as_slice().to_vec();
            let pre = self.layer.forward(&x);
            let (y, g) = if self.relu {
                (relu(&pre), relu_backward(&pre, &self.readout))
            } else {
                (pre, self.readout.clone())
            };
            let gx = self.layer.backward(&x, &g);
            for (a, b) in self.input.grad.as_mut_slice().iter_mut().zip(gx) {
                *a = *a + b;
            }
            dot(&y, &self.readout)
        }
    }

    pub struct EmbeddingProbe<T: Scalar = f64> {
        pub layer: Embedding<T>,
        pub indices: Vec<usize>,
        readout: Vec<T>,
    }

    impl<T: Scalar> EmbeddingProbe<T> {
        pub fn new(rows: usize, dim: usize, indices: Vec<usize>, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layer = Embedding::new("embedding", rows, dim, &mut rng);
            let readout = readout(indices.len() * dim, &mut rng);
            EmbeddingProbe {
                layer,
                indices,
                readout,
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for EmbeddingProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            self.layer.params_mut()
        }

        fn loss(&self) -> T {
            dot(&self.layer.lookup(&self.indices), &self.readout)
        }

        fn loss_and_grad(&mut self) -> T {
            let l = self.loss();
            self.layer.backward(&self.indices, &self.readout);
            l
        }
    }

    pub struct Conv2dProbe<T: Scalar = f64> {
        pub layer: Conv2d<T>,
        pub input: Param<T>,
        readout: Vec<T>,
    }

    impl<T: Scalar> Conv2dProbe<T> {
        pub fn new(
            input_shape: [usize; 3],
            out_channels: usize,
            kernel: (usize, usize),
            padding: (usize, usize),
            seed: u64,
        ) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layer = Conv2d::new("conv", input_shape[0], out_channels, kernel, padding, &mut rng);
            let input = Param::uniform("input", &input_shape, 1.0, &mut rng);
            let n: usize = layer.output_shape(&input_shape).iter().product();
            Conv2dProbe {
                layer,
                input,
                readout: readout(n, &mut rng),
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for Conv2dProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            let mut p = self.layer.params_mut();
            p.push(&mut self.input);
            p
        }

        fn loss(&self) -> T {
            dot(self.layer.forward(&self.input.value).as_slice(), &self.readout)
        }

        fn loss_and_grad(&mut self) -> T {
            let y = self.layer.forward(&self.input.value);
            let g = Tensor::from_vec(y.shape(), self.readout.clone());
            let x = self.input.value.clone();
            let gx = self.layer.backward(&x, &g);
            for (a, &b) in self.input.grad.as_mut_slice().iter_mut().zip(gx.as_slice()) {
                *a = *a + b;
            }
            dot(y.as_slice(), &self.readout)
        }
    }

    pub struct MaxPoolProbe<T: Scalar = f64> {
        pub input: Param<T>,
        pub window: (usize, usize),
        readout: Vec<T>,
    }

    impl<T: Scalar> MaxPoolProbe<T> {
        /// Inputs are a shuffled arithmetic progression so no two elements
        /// are within the finite-difference step of each other.
        pub fn new(input_shape: [usize; 3], window: (usize, usize), seed: u64) -> Self {
            use rand::seq::SliceRandom;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n: usize = input_shape.iter().product();
            let mut values: Vec<T> = (0..n).map(|k| T::of(k as f64 * 0.1 - 0.05 * n as f64)).collect();
            values.shuffle(&mut rng);
            let input = Param::new("input", Tensor::from_vec(&input_shape, values));
            let m = input_shape[0] * input_shape[1].div_ceil(window.0) * input_shape[2].div_ceil(window.1);
            MaxPoolProbe {
                input,
                window,
                readout: readout(m, &mut rng),
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for MaxPoolProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            vec![&mut self.input]
        }

        fn loss(&self) -> T {
            dot(max_pool2d(&self.input.value, self.window).0.as_slice(), &self.readout)
        }

        fn loss_and_grad(&mut self) -> T {
            let (y, arg) = max_pool2d(&self.input.value, self.window);
            let g = max_pool2d_backward(self.input.value.shape(), &arg, &self.readout);
            for (a, &b) in self.input.grad.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *a = *a + b;
            }
            dot(y.as_slice(), &self.readout)
        }
    }

    /// One LSTM step from a random state; the loss reads both `h'` and `c'`.
    pub struct LstmCellProbe<T: Scalar = f64> {
        pub cell: LstmCell<T>,
        pub input: Param<T>,
        pub h0: Param<T>,
        pub c0: Param<T>,
        readout_h: Vec<T>,
        readout_c: Vec<T>,
    }

    impl<T: Scalar> LstmCellProbe<T> {
        pub fn new(input_size: usize, hidden: usize, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            LstmCellProbe {
                cell: LstmCell::new("lstm", input_size, hidden, &mut rng),
                input: Param::uniform("input", &[input_size], 1.0, &mut rng),
                h0: Param::uniform("h0", &[hidden], 1.0, &mut rng),
                c0: Param::uniform("c0", &[hidden], 1.0, &mut rng),
                readout_h: readout(hidden, &mut rng),
                readout_c: readout(hidden, &mut rng),
            }
        }

        fn state(&self) -> LstmState<T> {
            LstmState {
                h: self.h0.value.as_slice().to_vec(),
                c: self.c0.value.as_slice().to_vec(),
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for LstmCellProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            let mut p = self.cell.params_mut();
            p.extend([&mut self.input, &mut self.h0, &mut self.c0]);
            p
        }

        fn loss(&self) -> T {
            let (s, _) = self.cell.step(self.input.value.as_slice(), &self.state());
            dot(&s.h, &self.readout_h) + dot(&s.c, &self.readout_c)
        }

        fn loss_and_grad(&mut self) -> T {
            let (s, cache) = self.cell.step(self.input.value.as_slice(), &self.state());
            let (rh, rc) = (self.readout_h.clone(), self.readout_c.clone());
            let (dx, dh, dc) = self.cell.backward_step(&cache, &rh, &rc);
            for (p, g) in [(&mut self.input, dx), (&mut self.h0, dh), (&mut self.c0, dc)] {
                for (a, b) in p.grad.as_mut_slice().iter_mut().zip(g) {
                    *a = *a + b;
                }
            }
            dot(&s.h, &rh) + dot(&s.c, &rc)
        }
    }

    /// Matching head: `bce(σ(fᵀg), t)` with both embeddings as parameters.
    pub struct BceHeadProbe<T: Scalar = f64> {
        pub left: Param<T>,
        pub right: Param<T>,
        pub label: bool,
    }

    impl<T: Scalar> BceHeadProbe<T> {
        pub fn new(dim: usize, label: bool, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            BceHeadProbe {
                left: Param::uniform("left", &[dim], 1.0, &mut rng),
                right: Param::uniform("right", &[dim], 1.0, &mut rng),
                label,
            }
        }
    }

    impl<T: Scalar> GradCheckable<T> for BceHeadProbe<T> {
        fn params_mut(&mut self) -> Vec<&mut Param<T>> {
            vec![&mut self.left, &mut self.right]
        }

        fn loss(&self) -> T {
            bce_with_logit(dot(self.left.value.as_slice(), self.right.value.as_slice()), self.label).0
        }

        fn loss_and_grad(&mut self) -> T {
            let f = self.left.value.as_slice().to_vec();
            let g = self.right.value.as_slice().to_vec();
            let (l, dz) = bce_with_logit(dot(&f, &g), self.label);
            for k in 0..f.len() {
                let gl = self.left.grad.as_mut_slice();
                gl[k] = gl[k] + dz * g[k];
                let gr = self.right.grad.as_mut_slice();
                gr[k] = gr[k] + dz * f[k];
            }
            l
        }
    }
}

#[cfg(test)]
mod tests {
    use super::probes::*;
    use super::*;
    use crate::neural::tensor::Tensor;

    struct Square {
        w: Param<f64>,
    }

    impl GradCheckable<f64> for Square {
        fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
            vec![&mut self.w]
        }
        fn loss(&self) -> f64 {
            self.w.value.as_slice()[0].powi(2)
        }
        fn loss_and_grad(&mut self) -> f64 {
            let w = self.w.value.as_slice()[0];
            self.w.grad.as_mut_slice()[0] += 2.0 * w;
            w * w
        }
    }

    #[test]
    fn square_gradient_at_three_is_six() {
        let mut f = Square {
            w: Param::new("w", Tensor::from_vec(&[1], vec![3.0])),
        };
        f.loss_and_grad();
        assert_eq!(f.w.grad.as_slice()[0], 6.0);
    }

    #[test]
    fn consecutive_backwards_double_the_gradient() {
        let mut p = DenseProbe::<f64>::new(4, 3, false, 5);
        p.loss_and_grad();
        let once = p.layer.weight.grad.clone();
        p.loss_and_grad();
        for (a, b) in p.layer.weight.grad.as_slice().iter().zip(once.as_slice()) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn dense_passes() {
        let r = grad_check(&mut DenseProbe::<f64>::new(4, 3, false, 1), 1e-5, 1e-4);
        assert!(r.passed(), "{:?}", r.worst());
    }

    #[test]
    fn lstm_cell_hidden_8_passes() {
        let r = grad_check(&mut LstmCellProbe::<f64>::new(5, 8, 2), 1e-5, 1e-4);
        assert!(r.passed(), "{:?}", r.worst());
    }

    struct Doubled(DenseProbe<f64>);

    impl GradCheckable<f64> for Doubled {
        fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
            self.0.params_mut()
        }
        fn loss(&self) -> f64 {
            self.0.loss()
        }
        fn loss_and_grad(&mut self) -> f64 {
            let l = self.0.loss_and_grad();
            for p in self.0.params_mut() {
                for g in p.grad.as_mut_slice() {
                    *g *= 2.0;
                }
            }
            l
        }
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let r = grad_check(&mut Doubled(DenseProbe::new(4, 3, false, 1)), 1e-5, 1e-4);
        assert!(!r.passed());
        assert!(r.max_rel_error() > 0.4);
    }
}
