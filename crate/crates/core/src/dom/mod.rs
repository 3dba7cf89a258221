//! Dynamic octree occupancy mapping.
//!
//! Scans accumulate into a sparse voxel map with log-odds measurement
//! updates; odometry uncertainty attenuates stored beliefs toward the 0.5
//! prior when the map is recentered into a new robot frame.

mod octree;
mod raycast;
mod snapshot;

pub use octree::{
    voxel_downsample, IntegrateStats, Leaf, MotionErrorModel, OccupancyOctree, SensorModel,
    VoxelIndex,
};
pub use raycast::line_voxels;
pub use snapshot::{load_snapshot, save_snapshot};

use thiserror::Error;

/// Log-odds saturation bound; keeps every voxel revisable
/// (P stays within [0.029, 0.971]).
pub const LOG_ODDS_CLAMP: f64 = 3.5;

/// Leaves whose attenuated |log-odds| falls below this are dropped.
pub const PRUNE_EPSILON: f64 = 1e-3;

/// Probabilities are clamped into [EPS, 1-EPS] before the log-odds map.
pub const PROBABILITY_EPSILON: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum DomError {
    #[error("bad magic in snapshot: {0:?}")]
    BadMagic([u8; 4]),
    #[error("truncated snapshot: {0}")]
    Truncated(String),
    #[error("invalid label code {0} in snapshot")]
    BadLabel(u8),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// ln(p / (1-p)), with p clamped into the open unit interval first.
pub fn logit(p: f64) -> f64 {
    let p = p.clamp(PROBABILITY_EPSILON, 1.0 - PROBABILITY_EPSILON);
    (p / (1.0 - p)).ln()
}

/// exp(l) / (exp(l) + 1), computed without overflow for any finite l.
pub fn inv_logit(l: f64) -> f64 {
    if l >= 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}
