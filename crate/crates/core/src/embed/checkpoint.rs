//! Checkpoints: a JSON manifest naming each tensor and its shape, plus a
//! flat little-endian f64 blob in manifest order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::{ModelParams, ParamLayout};
use super::EmbedError;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    seed: u64,
    config: ModelConfig,
    tensors: Vec<TensorEntry>,
}

/// Write `<stem>.json` and `<stem>.bin` under `dir`.
pub fn save_checkpoint(model: &ModelParams, dir: &Path, stem: &str) -> Result<(), EmbedError> {
    fs::create_dir_all(dir)?;
    let layout = ParamLayout::new(&model.config);
    let manifest = Manifest {
        format_version: CHECKPOINT_FORMAT_VERSION,
        seed: model.seed,
        config: model.config.clone(),
        tensors: layout
            .groups
            .iter()
            .map(|(name, _, shape)| TensorEntry { name: name.clone(), shape: shape.clone() })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| EmbedError::Manifest(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json)?;

    let flat = model.to_flat();
    let mut blob = Vec::with_capacity(flat.len() * 8);
    for v in &flat {
        blob.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(dir.join(format!("{stem}.bin")), blob)?;
    Ok(())
}

/// Load a checkpoint saved by [`save_checkpoint`], validating shapes
/// against the stored config.
pub fn load_checkpoint(dir: &Path, stem: &str) -> Result<ModelParams, EmbedError> {
    let json = fs::read_to_string(dir.join(format!("{stem}.json")))?;
    let manifest: Manifest =
        serde_json::from_str(&json).map_err(|e| EmbedError::Manifest(e.to_string()))?;
    if manifest.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(EmbedError::Manifest(format!(
            "unsupported format version {}",
            manifest.format_version
        )));
    }
    manifest.config.validate()?;
    let layout = ParamLayout::new(&manifest.config);
    if manifest.tensors.len() != layout.groups.len() {
        return Err(EmbedError::Manifest(format!(
            "{} tensors in manifest, layout expects {}",
            manifest.tensors.len(),
            layout.groups.len()
        )));
    }
    for (entry, (name, _, shape)) in manifest.tensors.iter().zip(layout.groups.iter()) {
        if entry.name != *name || entry.shape != *shape {
            return Err(EmbedError::Manifest(format!(
                "tensor {} with shape {:?} does not match expected {} {:?}",
                entry.name, entry.shape, name, shape
            )));
        }
    }

    let blob = fs::read(dir.join(format!("{stem}.bin")))?;
    if blob.len() != layout.total * 8 {
        return Err(EmbedError::BlobSize { expected: layout.total, found: blob.len() / 8 });
    }
    let flat: Vec<f64> = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ModelParams::from_flat(&manifest.config, manifest.seed, &flat)
}
