//! Octree snapshot files: magic `PSEO`, leaf size (f64), region center and
//! half-width (4 x f64), leaf count (u64), then per leaf the voxel index
//! (3 x i32), log-odds (f64) and label byte. Little-endian throughout.

use std::fs;
use std::path::Path;

use crate::scene::SemanticLabel;

use super::octree::{OccupancyOctree, VoxelIndex};
use super::DomError;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"PSEO";

pub fn save_snapshot(tree: &OccupancyOctree, path: &Path) -> Result<(), DomError> {
    let mut leaves: Vec<(VoxelIndex, f64, SemanticLabel)> =
        tree.iter().map(|(i, l)| (*i, l.log_odds, l.label)).collect();
    leaves.sort_unstable_by_key(|(i, _, _)| *i);

    let mut buf = Vec::with_capacity(48 + leaves.len() * 21);
    buf.extend_from_slice(&SNAPSHOT_MAGIC);
    buf.extend_from_slice(&tree.leaf_size().to_le_bytes());
    for c in tree.region_center() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    buf.extend_from_slice(&tree.half_width().to_le_bytes());
    buf.extend_from_slice(&(leaves.len() as u64).to_le_bytes());
    for (index, log_odds, label) in leaves {
        for i in index {
            buf.extend_from_slice(&i.to_le_bytes());
        }
        buf.extend_from_slice(&log_odds.to_le_bytes());
        buf.push(label.code());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<OccupancyOctree, DomError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 52 {
        return Err(DomError::Truncated("header".into()));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != SNAPSHOT_MAGIC {
        return Err(DomError::BadMagic(magic));
    }
    let f = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let leaf_size = f(4);
    let center = [f(12), f(20), f(28)];
    let half_width = f(36);
    let count = u64::from_le_bytes(bytes[44..52].try_into().unwrap()) as usize;
    let payload = &bytes[52..];
    if payload.len() < count * 21 {
        return Err(DomError::Truncated(format!(
            "{} leaves promised, {} bytes of payload",
            count,
            payload.len()
        )));
    }
    let mut tree = OccupancyOctree::new(center, half_width, leaf_size);
    for k in 0..count {
        let rec = &payload[k * 21..(k + 1) * 21];
        let index = [
            i32::from_le_bytes(rec[0..4].try_into().unwrap()),
            i32::from_le_bytes(rec[4..8].try_into().unwrap()),
            i32::from_le_bytes(rec[8..12].try_into().unwrap()),
        ];
        let log_odds = f64::from_le_bytes(rec[12..20].try_into().unwrap());
        let label = SemanticLabel::from_code(rec[20]).ok_or(DomError::BadLabel(rec[20]))?;
        tree.restore_leaf(index, log_odds, label);
    }
    Ok(tree)
}

impl OccupancyOctree {
    pub(super) fn restore_leaf(&mut self, index: VoxelIndex, log_odds: f64, label: SemanticLabel) {
        let leaf = self.insert_raw(index);
        leaf.log_odds = log_odds;
        leaf.label = label;
    }
}
