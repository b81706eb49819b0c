//! Implicit towers: an LSTM over a post's received applications gives
//! `g_I(p)`, one over a candidate's submitted applications gives `f_I(c)`.
//! History items are built from frozen explicit embeddings.

mod history;
mod tower;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use history::{encode_history, encode_item, item_width, Decision, HistoryEntry};
pub use tower::{ImplicitCache, ImplicitConfig, ImplicitTower};

use crate::corpus::{Corpus, DatasetSplit, PostId};
use crate::error::{Error, Result};
use crate::explicit::{EncodedCorpus, ExplicitModel};
use crate::fusion::compute_auc;
use crate::neural::{bce_with_logit, Module, Param};
use crate::scalar::{dot, Scalar};
use crate::train::{fit, TrainHyper, TrainLog};

pub const CANDIDATE_SECTION: &str = "implicit.candidate";
pub const POST_SECTION: &str = "implicit.post";

/// Explicit embeddings of every record's resume and every post, computed
/// once from trained towers and never updated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenExplicit<T: Scalar = f64> {
    pub d_e: usize,
    pub resumes: Vec<Vec<T>>,
    pub posts: BTreeMap<PostId, Vec<T>>,
}

impl<T: Scalar> FrozenExplicit<T> {
    pub fn from_model(model: &ExplicitModel<T>, data: &EncodedCorpus) -> Result<Self> {
        let (resumes, posts) = model.embed_all(data, 0..data.resumes.len())?;
        Ok(FrozenExplicit {
            d_e: model.resume.d_e(),
            resumes: resumes.into_iter().map(|(_, f)| f).collect(),
            posts,
        })
    }

    fn check(&self, corpus: &Corpus) -> Result<()> {
        if self.resumes.len() != corpus.len() || corpus.posts.keys().any(|p| !self.posts.contains_key(p)) {
            return Err(Error::Config(
                "explicit embeddings do not cover the corpus; train or load the explicit towers first".into(),
            ));
        }
        Ok(())
    }

    /// `f_E(r)ᵀ g_E(p)` of a record.
    pub fn logit(&self, corpus: &Corpus, record: usize) -> T {
        dot(&self.resumes[record], &self.posts[&corpus.records[record].post])
    }

    /// Encoded post-side and candidate-side histories of a record. Only
    /// records reviewed strictly earlier are used.
    pub fn sequences(&self, corpus: &Corpus, record: usize, config: &ImplicitConfig) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let (post_hist, cand_hist) = corpus.history_before(record);
        let entries = |hist: &[usize], keep: usize| -> Vec<HistoryEntry<'_, T>> {
            hist[hist.len().saturating_sub(keep)..]
                .iter()
                .map(|&k| {
                    let r = &corpus.records[k];
                    HistoryEntry {
                        resume: &self.resumes[k],
                        post: &self.posts[&r.post],
                        decision: Decision::from_label(r.label),
                    }
                })
                .collect()
        };
        (
            encode_history(&entries(post_hist, config.max_post_history), self.d_e, config.max_post_history),
            encode_history(
                &entries(cand_hist, config.max_candidate_history),
                self.d_e,
                config.max_candidate_history,
            ),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ImplicitModel<T: Scalar = f64> {
    pub config: ImplicitConfig,
    pub candidate: ImplicitTower<T>,
    pub post: ImplicitTower<T>,
}

impl<T: Scalar> ImplicitModel<T> {
    pub fn new(config: &ImplicitConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(ImplicitModel {
            config: config.clone(),
            candidate: ImplicitTower::new(CANDIDATE_SECTION, config, config.max_candidate_history, &mut rng)?,
            post: ImplicitTower::new(POST_SECTION, config, config.max_post_history, &mut rng)?,
        })
    }

    /// `(f_I(c), g_I(p))` of a record from its own history.
    pub fn embed_record(&self, corpus: &Corpus, frozen: &FrozenExplicit<T>, record: usize) -> Result<(Vec<T>, Vec<T>)> {
        let (post_seq, cand_seq) = frozen.sequences(corpus, record, &self.config);
        Ok((self.candidate.embed(&cand_seq)?, self.post.embed(&post_seq)?))
    }

    /// `f_I(c)ᵀ g_I(p)` for each listed record.
    pub fn logits(
        &self,
        corpus: &Corpus,
        frozen: &FrozenExplicit<T>,
        records: std::ops::Range<usize>,
    ) -> Result<Vec<T>> {
        frozen.check(corpus)?;
        records
            .into_par_iter()
            .map(|i| {
                let (f, g) = self.embed_record(corpus, frozen, i)?;
                Ok(dot(&f, &g))
            })
            .collect()
    }
}

impl<T: Scalar> Module<T> for ImplicitModel<T> {
    fn params(&self) -> Vec<&Param<T>> {
        let mut v = self.candidate.params();
        v.extend(self.post.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut v = self.candidate.params_mut();
        v.extend(self.post.params_mut());
        v
    }
}

/// `implicit_embed`: `f_I` or `g_I` of one encoded history.
pub fn implicit_embed<T: Scalar>(sequence: &[Vec<T>], tower: &ImplicitTower<T>) -> Result<Vec<T>> {
    tower.embed(sequence)
}

/// Mean BCE of `σ(f_I(c)ᵀ g_I(p))` over one mini-batch slice; gradients are
/// divided by `batch_len` and reach only the implicit towers.
pub fn implicit_batch_loss<T: Scalar>(
    model: &mut ImplicitModel<T>,
    corpus: &Corpus,
    frozen: &FrozenExplicit<T>,
    records: &[usize],
    batch_len: usize,
) -> Result<f64> {
    let scale = T::of(1.0 / batch_len as f64);
    let mut total = 0.0;
    for &i in records {
        let (post_seq, cand_seq) = frozen.sequences(corpus, i, &model.config);
        let (f, fc) = model.candidate.forward(&cand_seq)?;
        let (g, gc) = model.post.forward(&post_seq)?;
        let (loss, dz) = bce_with_logit(dot(&f, &g), corpus.records[i].label);
        total += loss.to_f64_lossless();
        let dz = dz * scale;
        let df: Vec<T> = g.iter().map(|&v| dz * v).collect();
        let dg: Vec<T> = f.iter().map(|&v| dz * v).collect();
        model.candidate.backward(&fc, &df);
        model.post.backward(&gc, &dg);
    }
    Ok(total)
}

/// Trains the implicit towers on the training block with the explicit
/// embeddings frozen. Epochs are compared by the validation AUC of the fused
/// logit `f_Eᵀg_E + f_Iᵀg_I`, the quantity the pipeline deploys.
pub fn train_implicit<T: Scalar>(
    model: &mut ImplicitModel<T>,
    corpus: &Corpus,
    split: &DatasetSplit,
    frozen: &FrozenExplicit<T>,
    hyper: &TrainHyper,
) -> Result<TrainLog> {
    frozen.check(corpus)?;
    if frozen.d_e != model.config.d_e {
        return Err(Error::Config(format!(
            "implicit towers expect d_E {} but the explicit embeddings have {}",
            model.config.d_e, frozen.d_e
        )));
    }
    let train: Vec<usize> = split.train.clone().collect();
    let val = split.validation.clone();
    let val_labels: Vec<bool> = corpus.records[val.clone()].iter().map(|r| r.label).collect();
    let explicit: Vec<T> = val.clone().map(|i| frozen.logit(corpus, i)).collect();
    fit(
        model,
        &train,
        hyper,
        |m, part, n| implicit_batch_loss(m, corpus, frozen, part, n),
        |m| {
            let fused: Vec<f64> = m
                .logits(corpus, frozen, val.clone())?
                .iter()
                .zip(&explicit)
                .map(|(&a, &b)| (a + b).to_f64_lossless())
                .collect();
            compute_auc(&fused, &val_labels)
        },
    )
}
