//! Sentence-level CNN: each sentence is embedded as a `[1, words, dim]`
//! map, passed through two (conv + relu + 2×1 max-pool) blocks, and the
//! flattened maps of all sentences go through one linear layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{TextDims, TextMatrix};
use crate::neural::{max_pool2d, max_pool2d_backward, relu, relu_backward, Conv2d, Dense, Embedding, Module, Param, Tensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextCnnConfig {
    pub dims: TextDims,
    pub vocab_size: usize,
    pub word_dim: usize,
    pub channels: usize,
    pub kernel_height: usize,
    pub pool_height: usize,
    pub out_dim: usize,
}

impl TextCnnConfig {
    pub fn desk(vocab_size: usize) -> Self {
        TextCnnConfig {
            dims: TextDims {
                max_sentences: 8,
                max_words: 16,
            },
            vocab_size,
            word_dim: 16,
            channels: 8,
            kernel_height: 3,
            pool_height: 2,
            out_dim: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.dims.max_sentences,
            self.dims.max_words,
            self.vocab_size,
            self.word_dim,
            self.channels,
            self.kernel_height,
            self.pool_height,
            self.out_dim,
        ];
        if all.contains(&0) {
            return Err(Error::Config(format!("text CNN dimensions must be ≥ 1: {self:?}")));
        }
        Ok(())
    }

    /// Height of the map after both blocks; odd kernels keep the height and
    /// each pool divides it by `pool_height`, rounding up.
    pub fn pooled_height(&self) -> usize {
        let pad = self.kernel_height / 2;
        let h1 = self.dims.max_words + 2 * pad + 1 - self.kernel_height;
        let p1 = h1.div_ceil(self.pool_height);
        let h2 = p1 + 2 * pad + 1 - self.kernel_height;
        h2.div_ceil(self.pool_height)
    }

    pub fn flat_len(&self) -> usize {
        self.dims.max_sentences * self.channels * self.pooled_height()
    }
}

#[derive(Debug, Clone)]
pub struct TextCnn<T: Scalar = f64> {
    pub config: TextCnnConfig,
    pub words: Embedding<T>,
    pub conv1: Conv2d<T>,
    pub conv2: Conv2d<T>,
    pub proj: Dense<T>,
}

#[derive(Debug, Clone)]
struct SentenceCache<T: Scalar> {
    x0: Tensor<T>,
    z1: Tensor<T>,
    arg1: Vec<usize>,
    p1: Tensor<T>,
    z2: Tensor<T>,
    arg2: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TextCache<T: Scalar = f64> {
    indices: Vec<usize>,
    sentences: Vec<SentenceCache<T>>,
    flat: Vec<T>,
}

impl<T: Scalar> TextCnn<T> {
    pub fn new<R: Rng + ?Sized>(name: &str, config: TextCnnConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let pad = config.kernel_height / 2;
        let c = config.channels;
        Ok(TextCnn {
            words: Embedding::new(&format!("{name}.words"), config.vocab_size, config.word_dim, rng),
            conv1: Conv2d::new(
                &format!("{name}.conv1"),
                1,
                c,
                (config.kernel_height, config.word_dim),
                (pad, 0),
                rng,
            ),
            conv2: Conv2d::new(&format!("{name}.conv2"), c, c, (config.kernel_height, 1), (pad, 0), rng),
            proj: Dense::new(&format!("{name}.proj"), config.flat_len(), config.out_dim, rng),
            config,
        })
    }

    fn check(&self, text: &TextMatrix) -> Result<()> {
        if text.dims != self.config.dims {
            return Err(Error::Shape(format!(
                "text matrix is {:?} but the CNN expects {:?}",
                text.dims, self.config.dims
            )));
        }
        if let Some(&i) = text.indices.iter().find(|&&i| i >= self.config.vocab_size) {
            return Err(Error::Shape(format!(
                "word index {i} out of bounds for a vocabulary of {}",
                self.config.vocab_size
            )));
        }
        Ok(())
    }

    pub fn forward(&self, text: &TextMatrix) -> Result<(Vec<T>, TextCache<T>)> {
        self.check(text)?;
        let (words, dim) = (self.config.dims.max_words, self.config.word_dim);
        let pool = (self.config.pool_height, 1);
        let mut flat = Vec::with_capacity(self.config.flat_len());
        let mut sentences = Vec::with_capacity(self.config.dims.max_sentences);
        for s in 0..self.config.dims.max_sentences {
            let x0 = Tensor::from_vec(&[1, words, dim], self.words.lookup(text.sentence(s)));
            let z1 = self.conv1.forward(&x0);
            let a1 = Tensor::from_vec(z1.shape(), relu(z1.as_slice()));
            let (p1, arg1) = max_pool2d(&a1, pool);
            let z2 = self.conv2.forward(&p1);
            let a2 = Tensor::from_vec(z2.shape(), relu(z2.as_slice()));
            let (p2, arg2) = max_pool2d(&a2, pool);
            flat.extend_from_slice(p2.as_slice());
            sentences.push(SentenceCache {
                x0,
                z1,
                arg1,
                p1,
                z2,
                arg2,
            });
        }
        let out = self.proj.forward(&flat);
        Ok((
            out,
            TextCache {
                indices: text.indices.clone(),
                sentences,
                flat,
            },
        ))
    }

    pub fn backward(&mut self, cache: &TextCache<T>, grad_out: &[T]) {
        let d_flat = self.proj.backward(&cache.flat, grad_out);
        let per = self.config.channels * self.config.pooled_height();
        let words = self.config.dims.max_words;
        for (s, sc) in cache.sentences.iter().enumerate() {
            let g = &d_flat[s * per..(s + 1) * per];
            let d_a2 = max_pool2d_backward(sc.z2.shape(), &sc.arg2, g);
            let d_z2 = Tensor::from_vec(sc.z2.shape(), relu_backward(sc.z2.as_slice(), d_a2.as_slice()));
            let d_p1 = self.conv2.backward(&sc.p1, &d_z2);
            let d_a1 = max_pool2d_backward(sc.z1.shape(), &sc.arg1, d_p1.as_slice());
            let d_z1 = Tensor::from_vec(sc.z1.shape(), relu_backward(sc.z1.as_slice(), d_a1.as_slice()));
            let d_x0 = self.conv1.backward(&sc.x0, &d_z1);
            self.words
                .backward(&cache.indices[s * words..(s + 1) * words], d_x0.as_slice());
        }
    }
}

impl<T: Scalar> Module<T> for TextCnn<T> {
    fn params(&self) -> Vec<&Param<T>> {
        let mut v = self.words.params();
        v.extend(self.conv1.params());
        v.extend(self.conv2.params());
        v.extend(self.proj.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut v = self.words.params_mut();
        v.extend(self.conv1.params_mut());
        v.extend(self.conv2.params_mut());
        v.extend(self.proj.params_mut());
        v
    }
}
