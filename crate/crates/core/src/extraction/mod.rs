//! Semantic entities: rule/dictionary extraction, schema fitting on the
//! training split, and expansion into sparse one-hot/standardized vectors.

pub mod lexicon;
pub mod rules;
mod schema;
pub mod text;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use schema::{
    DocKind, EntityField, EntitySchema, EntityValue, EntityVector, FieldKind, RawKind, SparseFeature, OOV,
};
pub use text::{TextDims, TextMatrix, WordVocab};

use crate::corpus::{Corpus, DatasetSplit, PostId};
use crate::error::{Error, Result};
use crate::io_util::{read_to_string, write_atomic};

pub const SCHEMA_FORMAT_VERSION: u32 = 1;

/// Fits the resume and post schemas on the training block only.
pub fn fit_schema(corpus: &Corpus, split: &DatasetSplit) -> Result<(EntitySchema, EntitySchema)> {
    let train = &corpus.records[split.train.clone()];
    let resume = EntitySchema::fit(DocKind::Resume, train.iter().map(|r| &r.resume))?;
    let post = EntitySchema::fit(DocKind::Post, train_posts(corpus, split).map(|p| corpus.post(p)))?;
    Ok((resume, post))
}

fn train_posts<'a>(corpus: &'a Corpus, split: &DatasetSplit) -> impl Iterator<Item = PostId> + 'a {
    corpus.records[split.train.clone()]
        .iter()
        .map(|r| r.post)
        .collect::<BTreeSet<_>>()
        .into_iter()
}

/// Everything fitted on the training split that turns documents into model
/// inputs; persisted as one versioned JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub format_version: u32,
    pub resume: EntitySchema,
    pub post: EntitySchema,
    pub words: WordVocab,
}

impl FeatureSchema {
    pub fn fit(corpus: &Corpus, split: &DatasetSplit) -> Result<Self> {
        let (resume, post) = fit_schema(corpus, split)?;
        let train = &corpus.records[split.train.clone()];
        let docs = train
            .iter()
            .map(|r| &r.resume)
            .chain(train_posts(corpus, split).map(|p| corpus.post(p)));
        Ok(FeatureSchema {
            format_version: SCHEMA_FORMAT_VERSION,
            resume,
            post,
            words: WordVocab::fit(docs),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &serde_json::to_vec_pretty(self).expect("serializable"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s: FeatureSchema = serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::format(path.display().to_string(), e))?;
        if s.format_version != SCHEMA_FORMAT_VERSION {
            return Err(Error::format(
                path.display().to_string(),
                format!("unsupported schema version {}", s.format_version),
            ));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, split_chronological, Document, GeneratorConfig};

    fn corpus(n: usize) -> Corpus {
        let cfg = GeneratorConfig {
            candidates: n / 3,
            posts: 12,
            applications: n,
            ..GeneratorConfig::default()
        };
        generate_synthetic(&cfg, 17).unwrap()
    }

    #[test]
    fn fits_desk_sizes_and_every_vocab_ends_with_oov() {
        let c = corpus(600);
        let split = split_chronological(c.len(), 0.2, 0.2).unwrap();
        let (r, p) = fit_schema(&c, &split).unwrap();
        assert_eq!((r.len(), p.len()), (24, 12));
        for f in r.fields.iter().chain(&p.fields) {
            if let FieldKind::Categorical { vocabulary } = &f.kind {
                assert_eq!(vocabulary.last().map(String::as_str), Some(OOV));
            }
        }
    }

    #[test]
    fn skill_vocabulary_is_the_train_values_plus_oov() {
        let docs: Vec<Document> = ["ml", "db", "ml"]
            .iter()
            .map(|s| {
                let mut d = Document::default();
                d.set("requirements", "skills", *s);
                d.set("requirements", "experience", format!("{}+ years", s.len()));
                d.set("compensation", "salary", if *s == "db" { "10k-20k" } else { "10k-30k" });
                d
            })
            .collect();
        let mut docs = docs;
        docs[0].set("requirements", "experience", "5+ years");
        let s = EntitySchema::fit(DocKind::Post, docs.iter()).unwrap();
        let FieldKind::Categorical { vocabulary } = &s.field("req_skill_1").unwrap().kind else {
            panic!()
        };
        let got: BTreeSet<&str> = vocabulary.iter().map(String::as_str).collect();
        assert_eq!(got, BTreeSet::from(["ml", "db", OOV]));
        assert_eq!(vocabulary.len(), 3);
    }

    #[test]
    fn constant_real_field_is_named_in_the_error() {
        let mut d = Document::default();
        d.set("demographics", "age", "30");
        let err = EntitySchema::fit(DocKind::Resume, [&d, &d]).unwrap_err();
        assert!(err.to_string().contains("`age`"), "{err}");
    }

    #[test]
    fn unknown_university_is_oov_and_age_is_kept() {
        let c = corpus(300);
        let split = split_chronological(c.len(), 0.2, 0.2).unwrap();
        let (r, _) = fit_schema(&c, &split).unwrap();
        let mut d = Document::default();
        d.set("demographics", "age", "27");
        d.set("education", "school", "Unseen Institute");
        let e = r.extract(&d);
        assert_eq!(e.0[0], EntityValue::Real(27.0));
        assert_eq!(e.0[3], EntityValue::Category(r.fields[3].oov_index().unwrap()));
    }

    #[test]
    fn post_skill_slots_are_filled_from_the_list() {
        let c = corpus(600);
        let split = split_chronological(c.len(), 0.2, 0.2).unwrap();
        let (_, p) = fit_schema(&c, &split).unwrap();
        let mut d = Document::default();
        d.set("requirements", "skills", "python, ml");
        let e = p.extract(&d);
        let names: Vec<String> = p.describe(&e).into_iter().map(|(_, v)| v).collect();
        assert_eq!(&names[1..5], &["python", "ml", "none", "none"]);
    }

    #[test]
    fn fitting_ignores_held_out_records() {
        let c = corpus(600);
        let split = split_chronological(c.len(), 0.2, 0.2).unwrap();
        let full = FeatureSchema::fit(&c, &split).unwrap();
        let mut truncated = c.clone();
        truncated.records.truncate(split.train.end);
        let only_train = FeatureSchema::fit(&truncated, &split).unwrap();
        assert_eq!(full, only_train);
    }
}
