//! Named-parameter container persisted as versioned JSON.
//!
//! Parameter names carry their section (`explicit.resume.*`,
//! `implicit.post.*`, ...), so one file can hold several towers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::param::Module;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::io_util::{config_hash, read_to_string, write_atomic};
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub params: Vec<NamedArray>,
}

impl Checkpoint {
    pub fn new<C: Serialize>(config: &C) -> Self {
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            config_hash: config_hash(config),
            config: serde_json::to_value(config).expect("config serializes"),
            params: Vec::new(),
        }
    }

    /// Adds every parameter of `module`, replacing entries with the same name.
    pub fn add_module<T: Scalar, M: Module<T> + ?Sized>(&mut self, module: &M) {
        for p in module.params() {
            let entry = NamedArray {
                name: p.name.clone(),
                shape: p.shape().to_vec(),
                values: p.value.as_slice().iter().map(|v| v.to_f64_lossless()).collect(),
            };
            match self.params.iter_mut().find(|a| a.name == entry.name) {
                Some(slot) => *slot = entry,
                None => self.params.push(entry),
            }
        }
    }

    pub fn has_section(&self, prefix: &str) -> bool {
        let prefix = format!("{prefix}.");
        self.params.iter().any(|a| a.name.starts_with(&prefix))
    }

    /// Copies stored values into `module`. Every parameter of the module must
    /// be present with an identical shape.
    pub fn load_into<T: Scalar, M: Module<T> + ?Sized>(&self, module: &mut M) -> Result<()> {
        for p in module.params_mut() {
            let stored = self
                .params
                .iter()
                .find(|a| a.name == p.name)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{}`", p.name)))?;
            if stored.shape != p.shape() {
                return Err(Error::Checkpoint(format!(
                    "parameter `{}` has shape {:?} in checkpoint but {:?} in model",
                    p.name,
                    stored.shape,
                    p.shape()
                )));
            }
            let values = stored.values.iter().map(|&v| T::of(v)).collect();
            p.set_value(Tensor::from_vec(&stored.shape, values));
        }
        Ok(())
    }

    /// Deserializes the manifest config into a concrete type.
    pub fn config_as<C: serde::de::DeserializeOwned>(&self) -> Result<C> {
        serde_json::from_value(self.config.clone())
            .map_err(|e| Error::Checkpoint(format!("config does not match expected type: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec(self).expect("checkpoint serializes");
        write_atomic(path, &bytes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::format(path.display().to_string(), e))?;
        if ckpt.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {} (expected {})",
                ckpt.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        if ckpt.config_hash != config_hash(&ckpt.config) {
            return Err(Error::Checkpoint("config hash does not match manifest".into()));
        }
        for a in &ckpt.params {
            if a.shape.iter().product::<usize>() != a.values.len() {
                return Err(Error::Checkpoint(format!("parameter `{}` value count", a.name)));
            }
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::layers::Dense;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_restores_exact_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let d = Dense::<f64>::new("explicit.resume.head", 5, 3, &mut ChaCha8Rng::seed_from_u64(9));
        let mut ck = Checkpoint::new(&serde_json::json!({"d": 5}));
        ck.add_module(&d);
        ck.save(&path).unwrap();

        let loaded = Checkpoint::load(&path).unwrap();
        assert!(loaded.has_section("explicit.resume"));
        assert!(!loaded.has_section("implicit"));
        let mut e = Dense::<f64>::zeros("explicit.resume.head", 5, 3);
        loaded.load_into(&mut e).unwrap();
        assert_eq!(e.weight.value, d.weight.value);
        assert_eq!(e.bias.value, d.bias.value);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let d = Dense::<f64>::zeros("x", 5, 3);
        let mut ck = Checkpoint::new(&0u8);
        ck.add_module(&d);
        let mut e = Dense::<f64>::zeros("x", 4, 3);
        let err = ck.load_into(&mut e).unwrap_err();
        assert!(err.to_string().contains("shape"));
    }

    #[test]
    fn missing_parameter_is_rejected() {
        let ck = Checkpoint::new(&0u8);
        let mut e = Dense::<f64>::zeros("x", 4, 3);
        assert!(ck.load_into(&mut e).is_err());
    }
}
