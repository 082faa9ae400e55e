//! Checkpoint files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes   "HWGCKPT1"
//! length     u64       byte length of the manifest
//! manifest   UTF-8 JSON CheckpointManifest
//! values     f64 * N   parameters in manifest tensor order
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::params::{NetworkSpec, ParameterSet};

const MAGIC: &[u8; 8] = b"HWGCKPT1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub version: String,
    /// "actor", "critic", "critic_target", "discriminator" or "predictor".
    pub model_kind: String,
    pub spec: NetworkSpec,
    pub seed: u64,
    pub step: u64,
    pub tensors: Vec<TensorEntry>,
    /// Free-form run information (training configuration, discount, ...).
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl CheckpointManifest {
    pub fn new(model_kind: &str, params: &ParameterSet, seed: u64, step: u64) -> Self {
        CheckpointManifest {
            version: crate::VERSION.to_string(),
            model_kind: model_kind.to_string(),
            spec: *params.spec(),
            seed,
            step,
            tensors: params
                .spec()
                .tensors()
                .into_iter()
                .map(|t| TensorEntry {
                    name: t.name.to_string(),
                    shape: t.shape,
                    offset: t.range.start,
                })
                .collect(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn with_extra(mut self, extra: serde_json::Value) -> Self {
        self.extra = extra;
        self
    }
}

/// Serializes a checkpoint to bytes.
pub fn encode(params: &ParameterSet, manifest: &CheckpointManifest) -> Vec<u8> {
    let json = serde_json::to_vec(manifest).expect("manifest serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in params.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(ParameterSet, CheckpointManifest)> {
    let bad = |m: &str| Error::Format {
        line: 0,
        message: format!("checkpoint: {m}"),
    };
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated manifest"))?;
    let manifest: CheckpointManifest =
        serde_json::from_slice(body).map_err(|e| bad(&e.to_string()))?;
    let data = &bytes[16 + len..];
    let count = manifest.spec.parameter_count();
    if data.len() != 8 * count {
        return Err(bad(&format!(
            "expected {} parameter bytes, found {}",
            8 * count,
            data.len()
        )));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let params = ParameterSet::from_values(manifest.spec, values)?;
    Ok((params, manifest))
}

/// Writes atomically: the file appears complete or not at all.
pub fn store(path: &Path, params: &ParameterSet, manifest: &CheckpointManifest) -> Result<()> {
    write_atomic(path, &encode(params, manifest))
}

pub fn load(path: &Path) -> Result<(ParameterSet, CheckpointManifest)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
