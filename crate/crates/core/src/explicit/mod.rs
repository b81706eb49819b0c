//! Explicit towers: factorization-machine and deep terms over the sparse
//! entity vector, plus a sentence CNN over the free text, fused by one
//! linear layer into `f_E(r)` (resume side) or `g_E(p)` (post side).

mod fm;
mod text_cnn;
mod tower;

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fm::{deep_component, fm_first_order, fm_second_order};
pub use text_cnn::{TextCache, TextCnn, TextCnnConfig};
pub use tower::{ExplicitConfig, ExplicitInput, ExplicitTower, TowerCache};

use crate::corpus::{Corpus, DatasetSplit, PostId};
use crate::error::Result;
use crate::extraction::{FeatureSchema, TextDims, TextMatrix};
use crate::fusion::compute_auc;
use crate::neural::{bce_with_logit, Module, Param};
use crate::scalar::{dot, sigmoid, Scalar};
use crate::train::{fit, TrainHyper, TrainLog};

pub const RESUME_SECTION: &str = "explicit.resume";
pub const POST_SECTION: &str = "explicit.post";

/// Model input for every record's resume and every post, built once.
#[derive(Debug, Clone)]
pub struct EncodedCorpus {
    pub resumes: Vec<ExplicitInput>,
    pub posts: BTreeMap<PostId, ExplicitInput>,
}

pub fn encode_corpus(corpus: &Corpus, schema: &FeatureSchema, dims: TextDims) -> EncodedCorpus {
    let input = |s: &crate::extraction::EntitySchema, d| ExplicitInput {
        sparse: s.features(d),
        text: TextMatrix::build(d, &schema.words, dims),
    };
    EncodedCorpus {
        resumes: corpus
            .records
            .par_iter()
            .map(|r| input(&schema.resume, &r.resume))
            .collect(),
        posts: corpus
            .posts
            .iter()
            .map(|(&id, d)| (id, input(&schema.post, d)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitModelConfig {
    pub resume: ExplicitConfig,
    pub post: ExplicitConfig,
}

impl ExplicitModelConfig {
    /// Desk defaults sized to a fitted schema: `d_fm = 7`, `d_E = 32`, the
    /// text branch when `use_text`, and no deep blocks (at a few thousand
    /// records the deep stack only memorises; set `deep_widths` to enable it).
    pub fn for_schema(schema: &FeatureSchema, use_text: bool) -> Self {
        let tower = |s: &crate::extraction::EntitySchema| ExplicitConfig {
            s: s.len(),
            d_x: s.sparse_dim(),
            d_fm: 7,
            d_e: 32,
            deep_widths: Vec::new(),
            text: use_text.then(|| TextCnnConfig::desk(schema.words.len())),
        };
        ExplicitModelConfig {
            resume: tower(&schema.resume),
            post: tower(&schema.post),
        }
    }

    pub fn uses_text(&self) -> bool {
        self.resume.text.is_some()
    }

    pub fn text_dims(&self) -> TextDims {
        self.resume.text.as_ref().map_or(
            TextDims {
                max_sentences: 1,
                max_words: 1,
            },
            |t| t.dims,
        )
    }
}

/// Resume tower and post tower; they share no parameters.
#[derive(Debug, Clone)]
pub struct ExplicitModel<T: Scalar = f64> {
    pub resume: ExplicitTower<T>,
    pub post: ExplicitTower<T>,
}

impl<T: Scalar> ExplicitModel<T> {
    pub fn new(config: &ExplicitModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(ExplicitModel {
            resume: ExplicitTower::new(RESUME_SECTION, config.resume.clone(), &mut rng)?,
            post: ExplicitTower::new(POST_SECTION, config.post.clone(), &mut rng)?,
        })
    }

    pub fn config(&self) -> ExplicitModelConfig {
        ExplicitModelConfig {
            resume: self.resume.config.clone(),
            post: self.post.config.clone(),
        }
    }

    /// `σ(f_E(r)ᵀ g_E(p))`.
    pub fn score(&self, resume: &ExplicitInput, post: &ExplicitInput) -> Result<T> {
        Ok(sigmoid(dot(&self.resume.embed(resume)?, &self.post.embed(post)?)))
    }

    /// Embeds every post once and every listed record's resume.
    pub fn embed_all(
        &self,
        data: &EncodedCorpus,
        records: impl IntoIterator<Item = usize>,
    ) -> Result<(Vec<(usize, Vec<T>)>, BTreeMap<PostId, Vec<T>>)> {
        let records: Vec<usize> = records.into_iter().collect();
        let resumes = records
            .par_iter()
            .map(|&i| Ok((i, self.resume.embed(&data.resumes[i])?)))
            .collect::<Result<Vec<_>>>()?;
        let posts = data
            .posts
            .par_iter()
            .map(|(&id, p)| Ok((id, self.post.embed(p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((resumes, posts.into_iter().collect()))
    }

    /// Scores of the given records, in order.
    pub fn scores(&self, corpus: &Corpus, data: &EncodedCorpus, records: std::ops::Range<usize>) -> Result<Vec<f64>> {
        let (f, g) = self.embed_all(data, records)?;
        Ok(f.iter()
            .map(|(i, fe)| sigmoid(dot(fe, &g[&corpus.records[*i].post])).to_f64_lossless())
            .collect())
    }
}

impl<T: Scalar> Module<T> for ExplicitModel<T> {
    fn params(&self) -> Vec<&Param<T>> {
        let mut v = self.resume.params();
        v.extend(self.post.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut v = self.resume.params_mut();
        v.extend(self.post.params_mut());
        v
    }
}

/// `explicit_embed`: `f_E` or `g_E` of one document.
pub fn explicit_embed<T: Scalar>(input: &ExplicitInput, tower: &ExplicitTower<T>) -> Result<Vec<T>> {
    tower.embed(input)
}

/// Mean binary cross-entropy of one mini-batch; gradients are accumulated
/// into `model` already divided by `batch_len`. Each post in the slice is
/// embedded once.
pub fn explicit_batch_loss<T: Scalar>(
    model: &mut ExplicitModel<T>,
    corpus: &Corpus,
    data: &EncodedCorpus,
    records: &[usize],
    batch_len: usize,
) -> Result<f64> {
    let mut posts: HashMap<PostId, (Vec<T>, TowerCache<T>, Vec<T>)> = HashMap::new();
    let mut order: Vec<PostId> = Vec::new();
    let mut resumes = Vec::with_capacity(records.len());
    for &i in records {
        let pid = corpus.records[i].post;
        if !posts.contains_key(&pid) {
            let (g, cache) = model.post.forward(&data.posts[&pid])?;
            let d = g.len();
            posts.insert(pid, (g, cache, vec![T::zero(); d]));
            order.push(pid);
        }
        resumes.push(model.resume.forward(&data.resumes[i])?);
    }
    let scale = T::of(1.0 / batch_len as f64);
    let mut total = 0.0;
    for (&i, (f, cache)) in records.iter().zip(&resumes) {
        let entry = posts.get_mut(&corpus.records[i].post).expect("post embedded above");
        let (loss, dz) = bce_with_logit(dot(f, &entry.0), corpus.records[i].label);
        total += loss.to_f64_lossless();
        let dz = dz * scale;
        for (acc, &fv) in entry.2.iter_mut().zip(f) {
            *acc = *acc + dz * fv;
        }
        let df: Vec<T> = entry.0.iter().map(|&g| dz * g).collect();
        model.resume.backward(cache, &df);
    }
    for pid in order {
        let (_, cache, dg) = &posts[&pid];
        model.post.backward(cache, dg);
    }
    Ok(total)
}

/// Minimizes mean BCE of `σ(f_E(r)ᵀ g_E(p))` over the training block and
/// keeps the parameters with the best validation AUC.
pub fn train_explicit<T: Scalar>(
    model: &mut ExplicitModel<T>,
    corpus: &Corpus,
    split: &DatasetSplit,
    data: &EncodedCorpus,
    hyper: &TrainHyper,
) -> Result<TrainLog> {
    let train: Vec<usize> = split.train.clone().collect();
    let val_labels: Vec<bool> = corpus.records[split.validation.clone()].iter().map(|r| r.label).collect();
    fit(
        model,
        &train,
        hyper,
        |m, part, n| explicit_batch_loss(m, corpus, data, part, n),
        |m| compute_auc(&m.scores(corpus, data, split.validation.clone())?, &val_labels),
    )
}
