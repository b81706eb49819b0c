//! Data model for candidates, posts and applications, the synthetic corpus
//! generator, chronological splits and per-record history lookup.

mod generate;
mod history;
mod io;
mod split;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use generate::{generate_synthetic, GeneratorConfig, GroundTruth, PostTruth, RecordTruth};
pub use history::{history_before_scan, HistoryIndex};
pub use io::{corpus_paths, CorpusPaths, CORPUS_FORMAT_VERSION};
pub use split::{split_chronological, DatasetSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PostId(pub u32);

/// Parsed document: named structured fields holding key/value text entries,
/// plus ordered free-text sentences.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub fields: BTreeMap<String, BTreeMap<String, String>>,
    pub sentences: Vec<String>,
}

pub type ResumeDoc = Document;
pub type PostDoc = Document;

impl Document {
    pub fn entry(&self, field: &str, key: &str) -> Option<&str> {
        self.fields.get(field)?.get(key).map(String::as_str)
    }

    pub fn set(&mut self, field: &str, key: &str, value: impl Into<String>) {
        self.fields
            .entry(field.to_string())
            .or_default()
            .insert(key.to_string(), value.into());
    }
}

mod label01 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// One submitted application: who applied, with which resume, to which post,
/// and what the recruiter decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationRecord {
    pub candidate: CandidateId,
    pub resume: ResumeDoc,
    pub post: PostId,
    #[serde(with = "label01")]
    pub label: bool,
    pub review_time: u64,
    /// Per-candidate submission counter, starting at 1.
    pub seq_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub config: GeneratorConfig,
}

/// Applications sorted by review time, the posts they refer to, and (for
/// generated corpora) the latent state the labels were drawn from.
#[derive(Debug)]
pub struct Corpus {
    pub records: Vec<ApplicationRecord>,
    pub posts: BTreeMap<PostId, PostDoc>,
    pub manifest: Manifest,
    pub truth: Option<GroundTruth>,
    index: OnceLock<HistoryIndex>,
}

impl Clone for Corpus {
    fn clone(&self) -> Self {
        Corpus::new(
            self.records.clone(),
            self.posts.clone(),
            self.manifest.clone(),
            self.truth.clone(),
        )
    }
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
            && self.posts == other.posts
            && self.manifest == other.manifest
            && self.truth == other.truth
    }
}

impl Corpus {
    pub fn new(
        records: Vec<ApplicationRecord>,
        posts: BTreeMap<PostId, PostDoc>,
        manifest: Manifest,
        truth: Option<GroundTruth>,
    ) -> Self {
        Corpus {
            records,
            posts,
            manifest,
            truth,
            index: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn post(&self, id: PostId) -> &PostDoc {
        &self.posts[&id]
    }

    pub fn history_index(&self) -> &HistoryIndex {
        self.index.get_or_init(|| HistoryIndex::build(self))
    }

    /// Record indices of earlier applications to the same post and earlier
    /// applications by the same candidate, both in review order. The query
    /// record is never included.
    pub fn history_before(&self, record: usize) -> (&[usize], &[usize]) {
        self.history_index().history_before(record)
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Same corpus with labels permuted across records: every feature keeps
    /// its distribution but carries no information about the label.
    pub fn with_shuffled_labels(&self, seed: u64) -> Corpus {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut labels = self.labels();
        labels.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut records = self.records.clone();
        for (r, l) in records.iter_mut().zip(labels) {
            r.label = l;
        }
        Corpus::new(records, self.posts.clone(), self.manifest.clone(), None)
    }

    /// Checks the structural invariants: strictly increasing review times,
    /// resolvable post ids, per-candidate submission counters 1, 2, ...
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |msg: String| Err(crate::Error::format("corpus", msg));
        let mut next_k: BTreeMap<CandidateId, u32> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 && r.review_time <= self.records[i - 1].review_time {
                return bad(format!("record {i}: review times not strictly increasing"));
            }
            if !self.posts.contains_key(&r.post) {
                return bad(format!("record {i}: unknown post {}", r.post.0));
            }
            let k = next_k.entry(r.candidate).or_insert(1);
            if r.seq_index != *k {
                return bad(format!(
                    "record {i}: candidate {} has seq_index {} but expected {}",
                    r.candidate.0, r.seq_index, k
                ));
            }
            *k += 1;
        }
        Ok(())
    }
}
