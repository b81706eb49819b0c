use serde::{Deserialize, Serialize};

use super::rules::{inventory, raw_entities, RawValue};
use crate::corpus::Document;
use crate::error::{Error, Result};

pub const OOV: &str = "<oov>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Resume,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawKind {
    Categorical,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    /// Sorted training values followed by the out-of-vocabulary token.
    Categorical { vocabulary: Vec<String> },
    /// Population statistics over the training split.
    Real { mean: f64, stddev: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityField {
    pub name: String,
    #[serde(flatten)]
    pub kind: FieldKind,
}

impl EntityField {
    /// Number of sparse slots this field occupies.
    pub fn width(&self) -> usize {
        match &self.kind {
            FieldKind::Categorical { vocabulary } => vocabulary.len(),
            FieldKind::Real { .. } => 1,
        }
    }

    pub fn oov_index(&self) -> Option<usize> {
        match &self.kind {
            FieldKind::Categorical { vocabulary } => Some(vocabulary.len() - 1),
            FieldKind::Real { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySchema {
    pub doc_kind: DocKind,
    pub fields: Vec<EntityField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EntityValue {
    Category(usize),
    Real(f64),
}

/// One value per schema field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityVector(pub Vec<EntityValue>);

/// One-hot / standardized expansion of an [`EntityVector`]: exactly one
/// active slot per schema field, flat indices strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFeature {
    pub dim: usize,
    pub slots: Vec<(usize, f64)>,
}

impl SparseFeature {
    pub fn active(&self) -> usize {
        self.slots.len()
    }
}

impl EntitySchema {
    /// Number of entities `s`.
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Sparse dimension `d_x`.
    pub fn sparse_dim(&self) -> usize {
        self.fields.iter().map(EntityField::width).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.fields
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.width();
                Some(o)
            })
            .collect()
    }

    pub fn field(&self, name: &str) -> Option<&EntityField> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Fits vocabularies and real-value statistics from training documents.
    pub fn fit<'a>(kind: DocKind, docs: impl IntoIterator<Item = &'a Document>) -> Result<Self> {
        let inv = inventory(kind);
        let mut cats: Vec<std::collections::BTreeSet<String>> = vec![Default::default(); inv.len()];
        let mut reals: Vec<Vec<f64>> = vec![Vec::new(); inv.len()];
        let mut seen = 0usize;
        for doc in docs {
            seen += 1;
            for (i, v) in raw_entities(doc, kind).into_iter().enumerate() {
                match v {
                    RawValue::Text(t) => {
                        cats[i].insert(t);
                    }
                    RawValue::Number(Some(x)) => reals[i].push(x),
                    RawValue::Number(None) => {}
                }
            }
        }
        if seen == 0 {
            return Err(Error::Config("cannot fit a schema on an empty training split".into()));
        }
        let fields = inv
            .into_iter()
            .enumerate()
            .map(|(i, (name, raw_kind))| {
                let kind = match raw_kind {
                    RawKind::Categorical => {
                        let mut vocabulary: Vec<String> = std::mem::take(&mut cats[i]).into_iter().collect();
                        vocabulary.push(OOV.to_string());
                        FieldKind::Categorical { vocabulary }
                    }
                    RawKind::Real => {
                        let (mean, stddev) = population_stats(&reals[i]).ok_or_else(|| Error::SchemaFit {
                            field: name.clone(),
                            reason: "has no numeric values in the training split".into(),
                        })?;
                        if !(stddev > 0.0) {
                            return Err(Error::SchemaFit {
                                field: name,
                                reason: "is constant on the training split (stddev 0)".into(),
                            });
                        }
                        FieldKind::Real { mean, stddev }
                    }
                };
                Ok(EntityField { name, kind })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EntitySchema {
            doc_kind: kind,
            fields,
        })
    }

    /// Runs the extraction rules and maps each raw value onto the schema.
    /// Unknown categories map to the OOV token and missing numbers to the
    /// training mean. Fields the rules do not produce are treated as missing.
    pub fn extract(&self, doc: &Document) -> EntityVector {
        let inv = inventory(self.doc_kind);
        let raw = raw_entities(doc, self.doc_kind);
        let values = self
            .fields
            .iter()
            .map(|f| {
                let r = inv.iter().position(|(n, _)| *n == f.name).map(|i| &raw[i]);
                resolve(f, r)
            })
            .collect();
        EntityVector(values)
    }

    /// Panics if an entity does not conform to the schema.
    pub fn encode(&self, entities: &EntityVector) -> SparseFeature {
        assert_eq!(
            entities.0.len(),
            self.fields.len(),
            "encode_sparse: {} entities for a schema of {} fields",
            entities.0.len(),
            self.fields.len()
        );
        let mut offset = 0;
        let mut slots = Vec::with_capacity(self.fields.len());
        for (f, v) in self.fields.iter().zip(&entities.0) {
            match (&f.kind, v) {
                (FieldKind::Categorical { vocabulary }, EntityValue::Category(i)) => {
                    assert!(
                        *i < vocabulary.len(),
                        "encode_sparse: field `{}` index {} out of vocabulary of {}",
                        f.name,
                        i,
                        vocabulary.len()
                    );
                    slots.push((offset + i, 1.0));
                }
                (FieldKind::Real { mean, stddev }, EntityValue::Real(x)) => {
                    slots.push((offset, (x - mean) / stddev));
                }
                _ => panic!("encode_sparse: field `{}` kind mismatch", f.name),
            }
            offset += f.width();
        }
        SparseFeature { dim: offset, slots }
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, x: &SparseFeature) -> EntityVector {
        assert_eq!(x.slots.len(), self.fields.len(), "decode_sparse: slot count");
        let values = self
            .fields
            .iter()
            .zip(self.offsets())
            .zip(&x.slots)
            .map(|((f, off), &(idx, val))| match &f.kind {
                FieldKind::Categorical { .. } => EntityValue::Category(idx - off),
                FieldKind::Real { mean, stddev } => EntityValue::Real(val * stddev + mean),
            })
            .collect();
        EntityVector(values)
    }

    pub fn features(&self, doc: &Document) -> SparseFeature {
        self.encode(&self.extract(doc))
    }

    /// Human-readable value of every field, for explanations.
    pub fn describe(&self, entities: &EntityVector) -> Vec<(String, String)> {
        self.fields
            .iter()
            .zip(&entities.0)
            .map(|(f, v)| {
                let shown = match (&f.kind, v) {
                    (FieldKind::Categorical { vocabulary }, EntityValue::Category(i)) => vocabulary[*i].clone(),
                    (_, EntityValue::Real(x)) => format!("{x}"),
                    (_, EntityValue::Category(i)) => format!("#{i}"),
                };
                (f.name.clone(), shown)
            })
            .collect()
    }

    /// A schema of `fields` entities whose sparse dimension is `sparse_dim`,
    /// with a handful of real fields and the remaining width spread over
    /// categorical vocabularies. Used for shape checks at large scale.
    pub fn synthetic(kind: DocKind, fields: usize, sparse_dim: usize) -> Self {
        assert!(fields >= 2 && sparse_dim >= 2 * fields, "synthetic schema: too narrow");
        let n_real = (fields / 8).max(1);
        let n_cat = fields - n_real;
        let cat_width = sparse_dim - n_real;
        let fields = (0..fields)
            .map(|i| {
                if i < n_cat {
                    let width = cat_width / n_cat + usize::from(i < cat_width % n_cat);
                    let mut vocabulary: Vec<String> = (0..width - 1).map(|k| format!("v{k}")).collect();
                    vocabulary.push(OOV.to_string());
                    EntityField {
                        name: format!("entity_{i}"),
                        kind: FieldKind::Categorical { vocabulary },
                    }
                } else {
                    EntityField {
                        name: format!("entity_{i}"),
                        kind: FieldKind::Real { mean: 0.0, stddev: 1.0 },
                    }
                }
            })
            .collect();
        EntitySchema { doc_kind: kind, fields }
    }
}

fn resolve(f: &EntityField, raw: Option<&RawValue>) -> EntityValue {
    match &f.kind {
        FieldKind::Categorical { vocabulary } => {
            let known = &vocabulary[..vocabulary.len() - 1];
            let idx = match raw {
                Some(RawValue::Text(t)) => known.binary_search(t).ok(),
                _ => None,
            };
            EntityValue::Category(idx.unwrap_or(vocabulary.len() - 1))
        }
        FieldKind::Real { mean, .. } => match raw {
            Some(RawValue::Number(Some(x))) => EntityValue::Real(*x),
            _ => EntityValue::Real(*mean),
        },
    }
}

fn population_stats(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(name: &str, vocab: &[&str]) -> EntityField {
        EntityField {
            name: name.into(),
            kind: FieldKind::Categorical {
                vocabulary: vocab.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    fn real(name: &str, mean: f64, stddev: f64) -> EntityField {
        EntityField {
            name: name.into(),
            kind: FieldKind::Real { mean, stddev },
        }
    }

    #[test]
    fn encode_one_hot_plus_standardized() {
        let s = EntitySchema {
            doc_kind: DocKind::Resume,
            fields: vec![cat("a", &["x", "y", OOV]), real("r", 5.0, 2.0)],
        };
        assert_eq!(s.sparse_dim(), 4);
        let x = s.encode(&EntityVector(vec![EntityValue::Category(1), EntityValue::Real(5.0)]));
        assert_eq!(x.slots, vec![(1, 1.0), (3, 0.0)]);
        assert_eq!(x.dim, 4);
        let x = s.encode(&EntityVector(vec![EntityValue::Category(0), EntityValue::Real(7.0)]));
        assert_eq!(x.slots, vec![(0, 1.0), (3, 1.0)]);
    }

    #[test]
    #[should_panic(expected = "out of vocabulary")]
    fn encode_rejects_out_of_range_index() {
        let s = EntitySchema {
            doc_kind: DocKind::Post,
            fields: vec![cat("a", &["x", OOV])],
        };
        s.encode(&EntityVector(vec![EntityValue::Category(2)]));
    }

    #[test]
    fn population_stddev() {
        assert_eq!(population_stats(&[2.0, 4.0]), Some((3.0, 1.0)));
    }

    #[test]
    fn synthetic_schema_hits_requested_sizes() {
        let s = EntitySchema::synthetic(DocKind::Resume, 264, 37_000);
        assert_eq!(s.len(), 264);
        assert_eq!(s.sparse_dim(), 37_000);
    }
}
