//! Descriptor stores: a JSON manifest (count, dimension, ids, positions)
//! plus a flat little-endian f32 blob in row order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scene::Point3;

use super::EvalError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DescriptorStore {
    pub dim: usize,
    pub ids: Vec<u64>,
    pub positions: Vec<Point3>,
    #[serde(skip)]
    pub descriptors: Vec<Vec<f64>>,
}

impl DescriptorStore {
    pub fn push(&mut self, id: u64, position: Point3, descriptor: Vec<f64>) {
        if self.descriptors.is_empty() {
            self.dim = descriptor.len();
        }
        self.ids.push(id);
        self.positions.push(position);
        self.descriptors.push(descriptor);
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    count: usize,
    dim: usize,
    ids: Vec<u64>,
    positions: Vec<Point3>,
}

/// Write `<stem>.json` and `<stem>.f32` under `dir`.
pub fn save_store(store: &DescriptorStore, dir: &Path, stem: &str) -> Result<(), EvalError> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        count: store.len(),
        dim: store.dim,
        ids: store.ids.clone(),
        positions: store.positions.clone(),
    };
    fs::write(
        dir.join(format!("{stem}.json")),
        serde_json::to_string_pretty(&manifest).map_err(|e| EvalError::Manifest(e.to_string()))?,
    )?;
    let mut blob = Vec::with_capacity(store.len() * store.dim * 4);
    for row in &store.descriptors {
        for v in row {
            blob.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    fs::write(dir.join(format!("{stem}.f32")), blob)?;
    Ok(())
}

pub fn load_store(dir: &Path, stem: &str) -> Result<DescriptorStore, EvalError> {
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)
            .map_err(|e| EvalError::Manifest(e.to_string()))?;
    if manifest.ids.len() != manifest.count || manifest.positions.len() != manifest.count {
        return Err(EvalError::Manifest("count does not match ids/positions".into()));
    }
    let blob = fs::read(dir.join(format!("{stem}.f32")))?;
    if blob.len() != manifest.count * manifest.dim * 4 {
        return Err(EvalError::Manifest(format!(
            "blob holds {} bytes, manifest promises {}",
            blob.len(),
            manifest.count * manifest.dim * 4
        )));
    }
    let mut descriptors = Vec::with_capacity(manifest.count);
    for r in 0..manifest.count {
        let start = r * manifest.dim * 4;
        descriptors.push(
            (0..manifest.dim)
                .map(|c| {
                    let at = start + c * 4;
                    f32::from_le_bytes(blob[at..at + 4].try_into().unwrap()) as f64
                })
                .collect(),
        );
    }
    Ok(DescriptorStore {
        dim: manifest.dim,
        ids: manifest.ids,
        positions: manifest.positions,
        descriptors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_round_trip() {
        let mut store = DescriptorStore::default();
        store.push(1, [0.0, 0.0, 0.0], vec![0.5, -0.25, 0.75]);
        store.push(2, [5.0, 1.0, 0.0], vec![0.125, 0.5, 0.0]);
        let dir = std::env::temp_dir().join("panoptes-eval-store");
        save_store(&store, &dir, "descs").unwrap();
        let loaded = load_store(&dir, "descs").unwrap();
        assert_eq!(loaded.ids, store.ids);
        assert_eq!(loaded.positions, store.positions);
        assert_eq!(loaded.descriptors, store.descriptors);
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let mut store = DescriptorStore::default();
        store.push(1, [0.0; 3], vec![1.0, 0.0]);
        let dir = std::env::temp_dir().join("panoptes-eval-store-bad");
        save_store(&store, &dir, "descs").unwrap();
        let blob = dir.join("descs.f32");
        std::fs::write(&blob, [0u8; 4]).unwrap();
        assert!(matches!(load_store(&dir, "descs"), Err(EvalError::Manifest(_))));
    }
}
