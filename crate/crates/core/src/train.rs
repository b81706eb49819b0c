//! Mini-batch training loop shared by the explicit and implicit stages.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{Adam, Module};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be ≥ 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be > 0 and weight decay ≥ 0 (got {}, {})",
                self.lr, self.weight_decay
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_auc: f64,
}

/// Gradient shards per batch. Fixed, so results do not depend on the
/// number of worker threads.
const SHARDS: usize = 8;

/// Runs `epochs` passes of shuffled mini-batches over `items`.
///
/// `batch_loss` receives a zero-gradient copy of the model and a slice of
/// items; it must accumulate `d(mean batch loss)/dθ` into the copy (so
/// divide by `batch_len`) and return the summed per-item loss. Shards are
/// reduced in a fixed order. After every epoch `validate` scores the model;
/// the best-scoring parameters are restored at the end.
pub fn fit<T, M, I, L, V>(
    model: &mut M,
    items: &[I],
    hyper: &TrainHyper,
    batch_loss: L,
    mut validate: V,
) -> Result<TrainLog>
where
    T: Scalar,
    M: Module<T> + Clone + Send + Sync,
    I: Clone + Send + Sync,
    L: Fn(&mut M, &[I], usize) -> Result<f64> + Sync,
    V: FnMut(&M) -> Result<f64>,
{
    hyper.validate()?;
    if items.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let adam = Adam::new(hyper.lr, hyper.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<I> = items.to_vec();
    let mut shards: Vec<M> = (0..SHARDS).map(|_| model.clone()).collect();
    let mut log = TrainLog {
        best_val_auc: f64::NEG_INFINITY,
        ..TrainLog::default()
    };
    let mut best = model.snapshot();
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(hyper.batch_size).enumerate() {
            let per = batch.len().div_ceil(SHARDS);
            for shard in shards.iter_mut() {
                for (dst, src) in shard.params_mut().into_iter().zip(model.params()) {
                    dst.value.as_mut_slice().copy_from_slice(src.value.as_slice());
                    dst.zero_grad();
                }
            }
            let losses: Vec<Result<f64>> = shards
                .par_iter_mut()
                .zip(batch.par_chunks(per))
                .map(|(shard, part)| batch_loss(shard, part, batch.len()))
                .collect();
            let mut loss = 0.0;
            for l in losses {
                loss += l?;
            }
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: b });
            }
            total += loss;
            model.zero_grad();
            for shard in shards.iter().take(batch.len().div_ceil(per)) {
                for (dst, src) in model.params_mut().into_iter().zip(shard.params()) {
                    for (g, &s) in dst.grad.as_mut_slice().iter_mut().zip(src.grad.as_slice()) {
                        *g = *g + s;
                    }
                }
            }
            adam.step(&mut model.params_mut())?;
        }
        let val_auc = validate(model)?;
        log.epochs.push(EpochLog {
            epoch,
            train_loss: total / items.len() as f64,
            val_auc,
        });
        if val_auc > log.best_val_auc {
            log.best_val_auc = val_auc;
            log.best_epoch = epoch;
            best = model.snapshot();
        }
    }
    model.restore(&best);
    Ok(log)
}
