//! LSTM cell with the standard input/forget/candidate/output gates:
//!
//! ```text
//! z = W [x; h] + b            (gate order i, f, g, o)
//! c' = σ(f) ⊙ c + σ(i) ⊙ tanh(g)
//! h' = σ(o) ⊙ tanh(c')
//! ```

use rand::Rng;

use super::param::{Module, Param};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<T: Scalar = f64> {
    pub h: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> LstmState<T> {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![T::zero(); hidden],
            c: vec![T::zero(); hidden],
        }
    }
}

/// What one step needs to run backward.
#[derive(Debug, Clone)]
pub struct LstmStepCache<T: Scalar = f64> {
    xh: Vec<T>,
    i: Vec<T>,
    f: Vec<T>,
    g: Vec<T>,
    o: Vec<T>,
    c_prev: Vec<T>,
    tanh_c: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct LstmCell<T: Scalar = f64> {
    /// `[4·hidden, input + hidden]`
    pub weight: Param<T>,
    pub bias: Param<T>,
    input_size: usize,
    hidden: usize,
}

impl<T: Scalar> LstmCell<T> {
    pub fn new<R: Rng + ?Sized>(name: &str, input_size: usize, hidden: usize, rng: &mut R) -> Self {
        let fan_in = input_size + hidden;
        let bound = 1.0 / (fan_in as f64).sqrt();
        LstmCell {
            weight: Param::uniform(format!("{name}.weight"), &[4 * hidden, fan_in], bound, rng),
            bias: Param::uniform(format!("{name}.bias"), &[4 * hidden], bound, rng),
            input_size,
            hidden,
        }
    }

    pub fn zeros(name: &str, input_size: usize, hidden: usize) -> Self {
        LstmCell {
            weight: Param::zeros(format!("{name}.weight"), &[4 * hidden, input_size + hidden]),
            bias: Param::zeros(format!("{name}.bias"), &[4 * hidden]),
            input_size,
            hidden,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn step(&self, x: &[T], state: &LstmState<T>) -> (LstmState<T>, LstmStepCache<T>) {
        let hd = self.hidden;
        assert!(
            x.len() == self.input_size && state.h.len() == hd && state.c.len() == hd,
            "lstm_step `{}`: input {} / state ({}, {}) but cell expects input {} hidden {}",
            self.weight.name,
            x.len(),
            state.h.len(),
            state.c.len(),
            self.input_size,
            hd
        );
        let width = self.input_size + hd;
        let mut xh = Vec::with_capacity(width);
        xh.extend_from_slice(x);
        xh.extend_from_slice(&state.h);

        let w = self.weight.value.as_slice();
        let b = self.bias.value.as_slice();
        let pre = |row: usize| -> T {
            w[row * width..(row + 1) * width]
                .iter()
                .zip(&xh)
                .fold(b[row], |acc, (&wi, &xi)| acc + wi * xi)
        };

        let mut i = vec![T::zero(); hd];
        let mut f = vec![T::zero(); hd];
        let mut g = vec![T::zero(); hd];
        let mut o = vec![T::zero(); hd];
        let mut c = vec![T::zero(); hd];
        let mut h = vec![T::zero(); hd];
        let mut tanh_c = vec![T::zero(); hd];
        for k in 0..hd {
            i[k] = sigmoid(pre(k));
            f[k] = sigmoid(pre(hd + k));
            g[k] = pre(2 * hd + k).tanh();
            o[k] = sigmoid(pre(3 * hd + k));
            c[k] = f[k] * state.c[k] + i[k] * g[k];
            tanh_c[k] = c[k].tanh();
            h[k] = o[k] * tanh_c[k];
        }
        let cache = LstmStepCache {
            xh,
            i,
            f,
            g,
            o,
            c_prev: state.c.clone(),
            tanh_c,
        };
        (LstmState { h, c }, cache)
    }

    /// Backward through one step given the gradients flowing into `h'` and
    /// `c'`. Returns `(dx, dh_prev, dc_prev)`.
    pub fn backward_step(
        &mut self,
        cache: &LstmStepCache<T>,
        dh: &[T],
        dc_next: &[T],
    ) -> (Vec<T>, Vec<T>, Vec<T>) {
        let hd = self.hidden;
        let width = self.input_size + hd;
        assert!(dh.len() == hd && dc_next.len() == hd, "lstm_backward: grad length");
        let one = T::one();
        let mut dz = vec![T::zero(); 4 * hd];
        let mut dc_prev = vec![T::zero(); hd];
        for k in 0..hd {
            let d_o = dh[k] * cache.tanh_c[k];
            let dc = dc_next[k] + dh[k] * cache.o[k] * (one - cache.tanh_c[k] * cache.tanh_c[k]);
            let d_i = dc * cache.g[k];
            let d_f = dc * cache.c_prev[k];
            let d_g = dc * cache.i[k];
            dc_prev[k] = dc * cache.f[k];
            dz[k] = d_i * cache.i[k] * (one - cache.i[k]);
            dz[hd + k] = d_f * cache.f[k] * (one - cache.f[k]);
            dz[2 * hd + k] = d_g * (one - cache.g[k] * cache.g[k]);
            dz[3 * hd + k] = d_o * cache.o[k] * (one - cache.o[k]);
        }
        let w = self.weight.value.as_slice();
        let gw = self.weight.grad.as_mut_slice();
        let gb = self.bias.grad.as_mut_slice();
        let mut dxh = vec![T::zero(); width];
        for (row, &d) in dz.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            gb[row] = gb[row] + d;
            let wr = &w[row * width..(row + 1) * width];
            let gr = &mut gw[row * width..(row + 1) * width];
            for j in 0..width {
                gr[j] = gr[j] + d * cache.xh[j];
                dxh[j] = dxh[j] + d * wr[j];
            }
        }
        let dh_prev = dxh.split_off(self.input_size);
        (dxh, dh_prev, dc_prev)
    }

    /// Runs from the zero state over `inputs`; returns the final state and
    /// the per-step caches.
    pub fn forward_sequence(&self, inputs: &[Vec<T>]) -> (LstmState<T>, Vec<LstmStepCache<T>>) {
        let mut state = LstmState::zeros(self.hidden);
        let mut caches = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (next, cache) = self.step(x, &state);
            state = next;
            caches.push(cache);
        }
        (state, caches)
    }

    /// Backpropagation through time from a gradient on the last hidden state.
    /// Returns the gradient for every input step.
    pub fn backward_sequence(&mut self, caches: &[LstmStepCache<T>], dh_last: &[T]) -> Vec<Vec<T>> {
        let mut dh = dh_last.to_vec();
        let mut dc = vec![T::zero(); self.hidden];
        let mut dxs = vec![Vec::new(); caches.len()];
        for (t, cache) in caches.iter().enumerate().rev() {
            let (dx, dh_prev, dc_prev) = self.backward_step(cache, &dh, &dc);
            dxs[t] = dx;
            dh = dh_prev;
            dc = dc_prev;
        }
        dxs
    }
}

impl<T: Scalar> Module<T> for LstmCell<T> {
    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}
