//! Dense, embedding and activation layers with hand-written backward passes.
//!
//! Layers keep no per-call state. `forward` returns the output and the caller
//! keeps whatever the matching `backward` needs (usually just the input).
//! Backward passes accumulate into `Param::grad`.

use rand::Rng;

use super::param::{Module, Param};
use crate::scalar::{sigmoid, Scalar};

/// Fully connected layer `y = W x + b`, `W` stored as `[out, in]`.
#[derive(Debug, Clone)]
pub struct Dense<T: Scalar = f64> {
    pub weight: Param<T>,
    pub bias: Param<T>,
}

impl<T: Scalar> Dense<T> {
    /// Weights and bias uniform in `±1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(name: &str, fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        Dense {
            weight: Param::uniform(format!("{name}.weight"), &[fan_out, fan_in], bound, rng),
            bias: Param::uniform(format!("{name}.bias"), &[fan_out], bound, rng),
        }
    }

    pub fn zeros(name: &str, fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weight: Param::zeros(format!("{name}.weight"), &[fan_out, fan_in]),
            bias: Param::zeros(format!("{name}.bias"), &[fan_out]),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn fan_out(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn forward(&self, input: &[T]) -> Vec<T> {
        let (n_out, n_in) = (self.fan_out(), self.fan_in());
        assert_eq!(
            input.len(),
            n_in,
            "dense_forward `{}`: input length {} but weight is [{}, {}]",
            self.weight.name,
            input.len(),
            n_out,
            n_in
        );
        let w = self.weight.value.as_slice();
        let b = self.bias.value.as_slice();
        (0..n_out)
            .map(|o| {
                let row = &w[o * n_in..(o + 1) * n_in];
                row.iter()
                    .zip(input)
                    .fold(b[o], |acc, (&wi, &xi)| acc + wi * xi)
            })
            .collect()
    }

    /// Accumulates `dW += g xᵀ`, `db += g` and returns `Wᵀ g`.
    pub fn backward(&mut self, input: &[T], grad_out: &[T]) -> Vec<T> {
        let (n_out, n_in) = (self.fan_out(), self.fan_in());
        assert_eq!(grad_out.len(), n_out, "dense_backward: grad length");
        assert_eq!(input.len(), n_in, "dense_backward: input length");
        let mut grad_in = vec![T::zero(); n_in];
        let w = self.weight.value.as_slice();
        let gw = self.weight.grad.as_mut_slice();
        let gb = self.bias.grad.as_mut_slice();
        for (o, &g) in grad_out.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            gb[o] = gb[o] + g;
            let row = &w[o * n_in..(o + 1) * n_in];
            let grow = &mut gw[o * n_in..(o + 1) * n_in];
            for i in 0..n_in {
                grow[i] = grow[i] + g * input[i];
                grad_in[i] = grad_in[i] + g * row[i];
            }
        }
        grad_in
    }
}

impl<T: Scalar> Module<T> for Dense<T> {
    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Lookup table of `rows` vectors of width `dim`.
#[derive(Debug, Clone)]
pub struct Embedding<T: Scalar = f64> {
    pub table: Param<T>,
}

impl<T: Scalar> Embedding<T> {
    /// Rows uniform in `±1/sqrt(dim)`.
    pub fn new<R: Rng + ?Sized>(name: &str, rows: usize, dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (dim.max(1) as f64).sqrt();
        Embedding {
            table: Param::uniform(format!("{name}.table"), &[rows, dim], bound, rng),
        }
    }

    pub fn rows(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.shape()[1]
    }

    /// Concatenation of the looked-up rows.
    pub fn lookup(&self, indices: &[usize]) -> Vec<T> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(indices.len() * dim);
        for &i in indices {
            assert!(
                i < self.rows(),
                "embedding_lookup `{}`: index {} out of bounds for {} rows",
                self.table.name,
                i,
                self.rows()
            );
            out.extend_from_slice(self.table.value.row(i));
        }
        out
    }

    pub fn backward(&mut self, indices: &[usize], grad_out: &[T]) {
        let dim = self.dim();
        assert_eq!(grad_out.len(), indices.len() * dim, "embedding_backward: grad length");
        for (k, &i) in indices.iter().enumerate() {
            let g = &grad_out[k * dim..(k + 1) * dim];
            let row = self.table.grad.row_mut(i);
            for (r, &gv) in row.iter_mut().zip(g) {
                *r = *r + gv;
            }
        }
    }
}

impl<T: Scalar> Module<T> for Embedding<T> {
    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.table]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.table]
    }
}

pub fn relu<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| v.max(T::zero())).collect()
}

/// Gradient of relu given its *input*.
pub fn relu_backward<T: Scalar>(input: &[T], grad_out: &[T]) -> Vec<T> {
    input
        .iter()
        .zip(grad_out)
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect()
}

pub fn sigmoid_vec<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| sigmoid(v)).collect()
}

/// Gradient of sigmoid given its *output*.
pub fn sigmoid_backward<T: Scalar>(output: &[T], grad_out: &[T]) -> Vec<T> {
    output
        .iter()
        .zip(grad_out)
        .map(|(&y, &g)| g * y * (T::one() - y))
        .collect()
}

pub fn tanh_vec<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| v.tanh()).collect()
}

/// Gradient of tanh given its *output*.
pub fn tanh_backward<T: Scalar>(output: &[T], grad_out: &[T]) -> Vec<T> {
    output
        .iter()
        .zip(grad_out)
        .map(|(&y, &g)| g * (T::one() - y * y))
        .collect()
}
