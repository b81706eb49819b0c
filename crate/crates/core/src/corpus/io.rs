//! On-disk layout: `<name>.jsonl` holds one application per line,
//! `<name>.posts.jsonl` one post per line, `<name>.manifest.json` the seed,
//! generator config and format version, and `<name>.truth.json` (optional)
//! the generator's latent state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ApplicationRecord, Corpus, Document, GroundTruth, Manifest, PostId};
use crate::error::{Error, Result};
use crate::io_util::{read_to_string, write_atomic};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub records: PathBuf,
    pub posts: PathBuf,
    pub manifest: PathBuf,
    pub truth: PathBuf,
}

pub fn corpus_paths(records: &Path) -> CorpusPaths {
    let stem = match records.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => records.with_extension(""),
        _ => records.to_path_buf(),
    };
    let sibling = |suffix: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    CorpusPaths {
        records: records.to_path_buf(),
        posts: sibling(".posts.jsonl"),
        manifest: sibling(".manifest.json"),
        truth: sibling(".truth.json"),
    }
}

#[derive(Serialize, Deserialize)]
struct PostLine {
    id: PostId,
    doc: Document,
}

fn jsonl<T: Serialize>(items: impl Iterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).expect("serializable");
        out.push(b'\n');
    }
    out
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::format(format!("{}:{}", path.display(), n + 1), e))
        })
        .collect()
}

impl Corpus {
    pub fn save(&self, path: &Path) -> Result<()> {
        let paths = corpus_paths(path);
        write_atomic(&paths.records, &jsonl(self.records.iter()))?;
        write_atomic(
            &paths.posts,
            &jsonl(self.posts.iter().map(|(id, doc)| PostLine {
                id: *id,
                doc: doc.clone(),
            })),
        )?;
        let manifest = serde_json::to_vec_pretty(&self.manifest).expect("serializable");
        write_atomic(&paths.manifest, &manifest)?;
        if let Some(truth) = &self.truth {
            write_atomic(&paths.truth, &serde_json::to_vec(truth).expect("serializable"))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let paths = corpus_paths(path);
        let records: Vec<ApplicationRecord> = parse_jsonl(&paths.records)?;
        let posts: BTreeMap<PostId, Document> = parse_jsonl::<PostLine>(&paths.posts)?
            .into_iter()
            .map(|l| (l.id, l.doc))
            .collect();
        let manifest: Manifest = serde_json::from_str(&read_to_string(&paths.manifest)?)
            .map_err(|e| Error::format(paths.manifest.display().to_string(), e))?;
        if manifest.format_version != CORPUS_FORMAT_VERSION {
            return Err(Error::format(
                paths.manifest.display().to_string(),
                format!("unsupported format version {}", manifest.format_version),
            ));
        }
        let truth: Option<GroundTruth> = if paths.truth.exists() {
            Some(
                serde_json::from_str(&read_to_string(&paths.truth)?)
                    .map_err(|e| Error::format(paths.truth.display().to_string(), e))?,
            )
        } else {
            None
        };
        let corpus = Corpus::new(records, posts, manifest, truth);
        corpus.validate()?;
        Ok(corpus)
    }
}
