//! The parallel semantic embedding network.
//!
//! Each static attribute runs through its own branch: zonal spherical
//! convolutions in the harmonic domain, a grid-space rectifier, VLAD
//! aggregation of the per-cell descriptors, and a linear projection. The
//! three branch descriptors concatenate and L2-normalize into the place
//! descriptor. Everything is f64 and deterministic; gradients are exact
//! reverse-mode and validated against central finite differences.

mod backward;
mod checkpoint;
mod config;
mod forward;
mod model;
mod naive;
mod vlad;

pub use backward::{backward, forward_with_gradients};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::ModelConfig;
pub use forward::{
    embed_place, forward_traced, BranchTrace, FeatureMap, ForwardTrace, PlaceDescriptor,
};
pub use model::{BranchModel, ConvLayer, ModelParams, ParamLayout, VladParams};
pub use naive::naive_descriptor;
pub use vlad::{vlad_aggregate, VladTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("stack resolution {stack} does not match model resolution {model}")]
    ShapeMismatch { stack: usize, model: usize },
    #[error("checkpoint manifest error: {0}")]
    Manifest(String),
    #[error("checkpoint blob holds {found} values, manifest promises {expected}")]
    BlobSize { expected: usize, found: usize },
    #[error(transparent)]
    Harmonics(#[from] crate::harmonics::HarmonicsError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
