use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DatasetSplit};
use crate::error::Result;
use crate::explicit::EncodedCorpus;
use crate::fusion::compute_auc;
use crate::neural::{bce_with_logit, Module, Param};
use crate::scalar::sigmoid;
use crate::train::{fit, TrainHyper, TrainLog};

/// Logistic regression on `[x_resume; x_post]`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    pub weight: Param,
    pub bias: Param,
    resume_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub resume_dim: usize,
    pub post_dim: usize,
}

impl LogisticRegression {
    pub fn new(config: &LrConfig) -> Self {
        LogisticRegression {
            weight: Param::zeros("baseline.lr.weight", &[config.resume_dim + config.post_dim]),
            bias: Param::zeros("baseline.lr.bias", &[1]),
            resume_dim: config.resume_dim,
        }
    }

    fn active<'a>(&self, data: &'a EncodedCorpus, corpus: &Corpus, record: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        let off = self.resume_dim;
        let post = &data.posts[&corpus.records[record].post].sparse.slots;
        data.resumes[record]
            .sparse
            .slots
            .iter()
            .copied()
            .chain(post.iter().map(move |&(j, v)| (off + j, v)))
    }

    pub fn logit(&self, data: &EncodedCorpus, corpus: &Corpus, record: usize) -> f64 {
        let w = self.weight.value.as_slice();
        self.active(data, corpus, record)
            .fold(self.bias.value.as_slice()[0], |acc, (j, v)| acc + w[j] * v)
    }

    pub fn scores(&self, data: &EncodedCorpus, corpus: &Corpus, records: std::ops::Range<usize>) -> Vec<f64> {
        records.map(|i| sigmoid(self.logit(data, corpus, i))).collect()
    }
}

impl Module<f64> for LogisticRegression {
    fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Adam on mean BCE; the optimizer's weight decay supplies the L2 term.
pub fn train_lr(
    model: &mut LogisticRegression,
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
        |m, part, n| {
            let mut total = 0.0;
            for &i in part {
                let (loss, dz) = bce_with_logit(m.logit(data, corpus, i), corpus.records[i].label);
                total += loss;
                let dz = dz / n as f64;
                let idx: Vec<(usize, f64)> = m.active(data, corpus, i).collect();
                let gw = m.weight.grad.as_mut_slice();
                for (j, v) in idx {
                    gw[j] += dz * v;
                }
                m.bias.grad.as_mut_slice()[0] += dz;
            }
            Ok(total)
        },
        |m| compute_auc(&m.scores(data, corpus, split.validation.clone()), &val_labels),
    )
}
