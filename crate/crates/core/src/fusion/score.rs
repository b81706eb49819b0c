use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, sigmoid, Scalar};

/// Candidate side `[f_E(r); f_I(c)]` and post side `[g_E(p); g_I(p)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedEmbedding<T: Scalar = f64> {
    pub candidate: Vec<T>,
    pub post: Vec<T>,
}

impl<T: Scalar> FusedEmbedding<T> {
    pub fn new(f_e: &[T], f_i: &[T], g_e: &[T], g_i: &[T]) -> Result<Self> {
        let candidate: Vec<T> = f_e.iter().chain(f_i).copied().collect();
        let post: Vec<T> = g_e.iter().chain(g_i).copied().collect();
        if candidate.len() != post.len() {
            return Err(Error::Shape(format!(
                "fused embeddings differ in length: candidate {} vs post {}",
                candidate.len(),
                post.len()
            )));
        }
        Ok(FusedEmbedding { candidate, post })
    }

    pub fn score(&self) -> T {
        sigmoid(dot(&self.candidate, &self.post))
    }
}

/// `σ(fᵀg)`.
pub fn match_score<T: Scalar>(f: &[T], g: &[T]) -> Result<T> {
    if f.len() != g.len() {
        return Err(Error::Shape(format!(
            "match_score: vectors of length {} and {}",
            f.len(),
            g.len()
        )));
    }
    Ok(sigmoid(dot(f, g)))
}

/// Which branches feed the final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EntityOnly,
    ExplicitBoth,
    FusedEntity,
    FusedBoth,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::EntityOnly, Mode::ExplicitBoth, Mode::FusedEntity, Mode::FusedBoth];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::EntityOnly => "entity-only",
            Mode::ExplicitBoth => "explicit-both",
            Mode::FusedEntity => "fused-entity",
            Mode::FusedBoth => "fused-both",
        }
    }

    /// Whether the explicit towers include the text branch.
    pub fn uses_text(self) -> bool {
        matches!(self, Mode::ExplicitBoth | Mode::FusedBoth)
    }

    pub fn uses_implicit(self) -> bool {
        matches!(self, Mode::FusedEntity | Mode::FusedBoth)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`; expected one of entity-only, explicit-both, fused-entity, fused-both")))
    }
}
