//! Labeled point clouds, rigid poses, synthetic scenarios, and file I/O.
//!
//! Everything here is immutable after construction and safe to share across
//! workers; the I/O helpers touch only their named paths.

mod io;
mod synth;
mod types;

pub use io::{load_cloud, load_poses, save_cloud, save_poses};
pub use synth::{synth_scenario, Scenario, ScenarioSpec};
pub use types::{Point3, Pose, SemanticLabel, SemanticPointCloud, StaticPartition};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("truncated file: header promises {expected} points, payload holds {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },
    #[error("invalid semantic label code {0} (valid codes are 0..=4)")]
    BadLabel(u8),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("malformed pose line {line}: {reason}")]
    BadPoseLine { line: usize, reason: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
