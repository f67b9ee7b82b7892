//! Parameter checkpoints: a little-endian `f64` blob plus a JSON sidecar
//! holding the architecture.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ParamVector};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub format_version: u32,
    pub model: ModelSpec,
    pub param_count: usize,
}

/// Sidecar path for a checkpoint blob: `name.bin` → `name.json`.
pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

pub fn save_checkpoint(path: impl AsRef<Path>, spec: &ModelSpec, params: &ParamVector) -> Result<()> {
    let path = path.as_ref();
    if params.len() != spec.param_count() {
        return Err(Error::shape(format!(
            "checkpoint has {} values, model expects {}",
            params.len(),
            spec.param_count()
        )));
    }
    let mut bytes = Vec::with_capacity(params.len() * 8);
    for v in params.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let meta = CheckpointMeta {
        format_version: CHECKPOINT_FORMAT_VERSION,
        model: spec.clone(),
        param_count: params.len(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelSpec, ParamVector)> {
    let path = path.as_ref();
    let meta: CheckpointMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if meta.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::config(format!(
            "checkpoint format version {} is not supported",
            meta.format_version
        )));
    }
    meta.model.validate()?;
    let bytes = fs::read(path)?;
    if bytes.len() != meta.param_count * 8 || meta.param_count != meta.model.param_count() {
        return Err(Error::shape(format!(
            "{}: {} bytes for {} declared parameters ({} in model)",
            path.display(),
            bytes.len(),
            meta.param_count,
            meta.model.param_count()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let params = ParamVector::from_values(&meta.model, values)?;
    Ok((meta.model, params))
}
