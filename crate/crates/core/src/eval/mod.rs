//! Descriptor indexing, retrieval metrics, sequence matching, and
//! viewpoint sweeps.

mod index;
mod metrics;
mod seq;
mod store;
mod sweep;

pub use index::{build_index, DescriptorIndex};
pub use metrics::{evaluate, pr_curve, recall_at, EvalReport, PrCurve, TopSpec};
pub use seq::{difference_matrix, local_normalize, sequence_match, DifferenceMatrix, SeqMatchConfig};
pub use store::{load_store, save_store, DescriptorStore};
pub use sweep::{viewpoint_sweep, SweepConfig, SweepSurface};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("duplicate id {0} in index")]
    DuplicateId(u64),
    #[error("index is empty")]
    EmptyIndex,
    #[error("query set is empty")]
    EmptyQueries,
    #[error("input is empty")]
    EmptyInput,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("ids/positions/descriptors lengths differ")]
    LengthMismatch,
    #[error("window must be odd and at least 1, got {0}")]
    BadWindow(usize),
    #[error("matrix {rows}x{cols} smaller than the {v}-frame sequence window")]
    MatrixTooSmall { rows: usize, cols: usize, v: usize },
    #[error("store manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
    #[error(transparent)]
    Sphere(#[from] crate::sphere::SphereError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
