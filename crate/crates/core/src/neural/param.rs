use rand::Rng;

use super::tensor::Tensor;
use crate::scalar::Scalar;

/// A trainable tensor together with its gradient and Adam moments.
#[derive(Debug, Clone)]
pub struct Param<T: Scalar = f64> {
    pub name: String,
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub m: Tensor<T>,
    pub v: Tensor<T>,
    pub step: u64,
}

impl<T: Scalar> Param<T> {
    pub fn new(name: impl Into<String>, value: Tensor<T>) -> Self {
        let shape = value.shape().to_vec();
        Param {
            name: name.into(),
            grad: Tensor::zeros(&shape),
            m: Tensor::zeros(&shape),
            v: Tensor::zeros(&shape),
            value,
            step: 0,
        }
    }

    pub fn zeros(name: impl Into<String>, shape: &[usize]) -> Self {
        Self::new(name, Tensor::zeros(shape))
    }

    /// Uniform in `[-bound, bound)`.
    pub fn uniform<R: Rng + ?Sized>(
        name: impl Into<String>,
        shape: &[usize],
        bound: f64,
        rng: &mut R,
    ) -> Self {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| T::of(rng.random_range(-bound..bound)))
            .collect();
        Self::new(name, Tensor::from_vec(shape, data))
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }

    /// Replaces the value, keeping the optimizer state untouched.
    pub fn set_value(&mut self, value: Tensor<T>) {
        assert_eq!(
            value.shape(),
            self.value.shape(),
            "Param::set_value `{}`: shape mismatch",
            self.name
        );
        self.value = value;
    }
}

/// Anything that owns trainable parameters.
pub trait Module<T: Scalar> {
    fn params(&self) -> Vec<&Param<T>>;
    fn params_mut(&mut self) -> Vec<&mut Param<T>>;

    fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Copy of all parameter values, for best-epoch snapshots.
    fn snapshot(&self) -> Vec<Tensor<T>> {
        self.params().iter().map(|p| p.value.clone()).collect()
    }

    fn restore(&mut self, snapshot: &[Tensor<T>]) {
        let params = self.params_mut();
        assert_eq!(params.len(), snapshot.len(), "restore: parameter count");
        for (p, v) in params.into_iter().zip(snapshot) {
            p.set_value(v.clone());
        }
    }
}
