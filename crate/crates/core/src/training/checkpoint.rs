//! Versioned checkpoint persistence.
//!
//! A checkpoint is a single JSON document pairing the model config, every
//! named parameter array, the preprocessing config the model was trained
//! with, and training provenance. Numbers round-trip exactly (shortest
//! representation that parses back to the same f64), so save -> load -> save
//! is byte-identical.

use crate::error::{Error, Result};
use crate::network::{ModelConfig, ModelParams};
use crate::preprocess::PreprocessConfig;
use crate::signal::Dataset;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParam {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub epochs: usize,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub dataset_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model_config: ModelConfig,
    pub preprocess_config: PreprocessConfig,
    pub params: Vec<NamedParam>,
    pub provenance: Provenance,
}

impl Checkpoint {
    pub fn from_parts(
        model_config: &ModelConfig,
        params: &ModelParams,
        preprocess_config: &PreprocessConfig,
        provenance: Provenance,
    ) -> Self {
        let named = params
            .views()
            .into_iter()
            .map(|v| NamedParam {
                name: v.name,
                shape: v.shape,
                values: v.values.to_vec(),
            })
            .collect();
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            model_config: model_config.clone(),
            preprocess_config: preprocess_config.clone(),
            params: named,
            provenance,
        }
    }

    /// Rebuild the parameter struct, matching arrays by name and shape.
    pub fn to_params(&self) -> Result<ModelParams> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported checkpoint format version {}",
                self.format_version
            )));
        }
        let mut params = ModelParams::zeros(&self.model_config)?;
        let by_name: HashMap<&str, &NamedParam> =
            self.params.iter().map(|p| (p.name.as_str(), p)).collect();
        if by_name.len() != self.params.len() {
            return Err(Error::Data("duplicate parameter names in checkpoint".into()));
        }
        let expected: Vec<(String, Vec<usize>)> = params
            .views()
            .into_iter()
            .map(|v| (v.name, v.shape))
            .collect();
        let mut arrays = params.values_mut();
        for (k, (name, shape)) in expected.iter().enumerate() {
            let stored = by_name.get(name.as_str()).ok_or_else(|| {
                Error::Data(format!("checkpoint is missing parameter {:?}", name))
            })?;
            if &stored.shape != shape {
                return Err(Error::Data(format!(
                    "parameter {:?} has shape {:?}, expected {:?}",
                    name, stored.shape, shape
                )));
            }
            if stored.values.len() != arrays[k].len() {
                return Err(Error::Data(format!(
                    "parameter {:?} has {} values, expected {}",
                    name,
                    stored.values.len(),
                    arrays[k].len()
                )));
            }
            arrays[k].copy_from_slice(&stored.values);
        }
        if self.params.len() != expected.len() {
            return Err(Error::Data(format!(
                "checkpoint has {} parameters, config wants {}",
                self.params.len(),
                expected.len()
            )));
        }
        Ok(params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut body = self.to_json()?;
        body.push('\n');
        fs::write(path, body)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read checkpoint {}: {}", path.display(), e)))?;
        Self::from_json(&body)
    }
}

/// SHA-256 over the canonical JSON encoding of the windows.
pub fn dataset_hash(data: &Dataset) -> String {
    let mut hasher = Sha256::new();
    for w in &data.windows {
        let line = serde_json::to_string(w).expect("window serializes");
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{:02x}", byte));
    }
    out
}
