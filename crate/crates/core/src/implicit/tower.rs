use rand::Rng;
use serde::{Deserialize, Serialize};

use super::history::item_width;
use crate::error::{Error, Result};
use crate::neural::lstm::LstmStepCache;
use crate::neural::{Dense, LstmCell, Module, Param};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitConfig {
    /// Length of the frozen explicit embeddings inside history items.
    pub d_e: usize,
    pub hidden: usize,
    pub d_i: usize,
    pub max_post_history: usize,
    pub max_candidate_history: usize,
}

impl ImplicitConfig {
    pub fn new(d_e: usize) -> Self {
        ImplicitConfig {
            d_e,
            hidden: 64,
            d_i: 64,
            max_post_history: 20,
            max_candidate_history: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            self.d_e,
            self.hidden,
            self.d_i,
            self.max_post_history,
            self.max_candidate_history,
        ];
        if sizes.contains(&0) {
            return Err(Error::Config(format!(
                "implicit sizes must all be ≥ 1, got d_E {} hidden {} d_I {} history {}/{}",
                self.d_e, self.hidden, self.d_i, self.max_post_history, self.max_candidate_history
            )));
        }
        Ok(())
    }

    pub fn item_width(&self) -> usize {
        item_width(self.d_e)
    }
}

/// LSTM over a fixed-length history, last hidden state projected to `d_I`.
#[derive(Debug, Clone)]
pub struct ImplicitTower<T: Scalar = f64> {
    pub lstm: LstmCell<T>,
    pub head: Dense<T>,
    max_len: usize,
}

#[derive(Debug, Clone)]
pub struct ImplicitCache<T: Scalar = f64> {
    steps: Vec<LstmStepCache<T>>,
    last_h: Vec<T>,
}

impl<T: Scalar> ImplicitTower<T> {
    pub fn new<R: Rng + ?Sized>(name: &str, config: &ImplicitConfig, max_len: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if max_len == 0 {
            return Err(Error::Config("history length must be ≥ 1".into()));
        }
        Ok(ImplicitTower {
            lstm: LstmCell::new(&format!("{name}.lstm"), config.item_width(), config.hidden, rng),
            head: Dense::new(&format!("{name}.head"), config.hidden, config.d_i, rng),
            max_len,
        })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn d_i(&self) -> usize {
        self.head.fan_out()
    }

    fn check(&self, sequence: &[Vec<T>]) -> Result<()> {
        if sequence.len() != self.max_len {
            return Err(Error::Shape(format!(
                "implicit_embed: sequence of length {} but the tower expects {}",
                sequence.len(),
                self.max_len
            )));
        }
        let w = self.lstm.input_size();
        if let Some(bad) = sequence.iter().find(|x| x.len() != w) {
            return Err(Error::Shape(format!(
                "implicit_embed: history item of width {} but the tower expects {w}",
                bad.len()
            )));
        }
        Ok(())
    }

    pub fn embed(&self, sequence: &[Vec<T>]) -> Result<Vec<T>> {
        Ok(self.forward(sequence)?.0)
    }

    pub fn forward(&self, sequence: &[Vec<T>]) -> Result<(Vec<T>, ImplicitCache<T>)> {
        self.check(sequence)?;
        let (state, steps) = self.lstm.forward_sequence(sequence);
        let out = self.head.forward(&state.h);
        Ok((
            out,
            ImplicitCache {
                steps,
                last_h: state.h,
            },
        ))
    }

    /// Accumulates parameter gradients; the inputs are frozen so their
    /// gradients are dropped.
    pub fn backward(&mut self, cache: &ImplicitCache<T>, grad: &[T]) {
        let dh = self.head.backward(&cache.last_h, grad);
        self.lstm.backward_sequence(&cache.steps, &dh);
    }
}

impl<T: Scalar> Module<T> for ImplicitTower<T> {
    fn params(&self) -> Vec<&Param<T>> {
        let mut v = self.lstm.params();
        v.extend(self.head.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut v = self.lstm.params_mut();
        v.extend(self.head.params_mut());
        v
    }
}
