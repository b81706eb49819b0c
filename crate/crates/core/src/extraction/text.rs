//! Word vocabulary and fixed-shape sentence×word index matrices for the
//! free-text branch.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;

pub const PAD: usize = 0;
pub const UNK: usize = 1;

pub fn tokenize(sentence: &str) -> impl Iterator<Item = String> + '_ {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Index 0 is padding, 1 is unknown; words follow in sorted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVocab {
    pub words: Vec<String>,
}

impl WordVocab {
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Self {
        let mut set = BTreeSet::new();
        for d in docs {
            for s in &d.sentences {
                set.extend(tokenize(s));
            }
        }
        let mut words = vec!["<pad>".to_string(), "<unk>".to_string()];
        words.extend(set);
        WordVocab { words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> usize {
        self.words[2..]
            .binary_search_by(|w| w.as_str().cmp(word))
            .map(|i| i + 2)
            .unwrap_or(UNK)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextDims {
    pub max_sentences: usize,
    pub max_words: usize,
}

/// Word indices, `max_sentences × max_words`, row-major, padded with
/// [`PAD`]. Sentences and words beyond the limits are truncated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextMatrix {
    pub dims: TextDims,
    pub indices: Vec<usize>,
}

impl TextMatrix {
    pub fn build(doc: &Document, vocab: &WordVocab, dims: TextDims) -> Self {
        let mut indices = vec![PAD; dims.max_sentences * dims.max_words];
        for (s, sentence) in doc.sentences.iter().take(dims.max_sentences).enumerate() {
            for (w, word) in tokenize(sentence).take(dims.max_words).enumerate() {
                indices[s * dims.max_words + w] = vocab.index(&word);
            }
        }
        TextMatrix { dims, indices }
    }

    pub fn all_pad(dims: TextDims) -> Self {
        TextMatrix {
            dims,
            indices: vec![PAD; dims.max_sentences * dims.max_words],
        }
    }

    pub fn sentence(&self, s: usize) -> &[usize] {
        &self.indices[s * self.dims.max_words..(s + 1) * self.dims.max_words]
    }
}
