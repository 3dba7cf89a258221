//! Two-channel spherical projections of per-attribute local maps.
//!
//! Each static attribute gets an n x n equiangular image holding, per cell,
//! the range of the closest point and |sin| of the angle between the ray
//! toward it and its surface normal. Empty cells carry the (0, 0) sentinel
//! plus an explicit validity mask.

mod image;
mod normals;
mod project;
mod stack_io;

pub use image::{SphericalImage, SphericalStack};
pub use normals::{estimate_normals, NormalEstimate};
pub use project::{project_attribute, project_stack, LayerStats, ProjectStats, StackStats};
pub use stack_io::{load_stack, save_stack};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SphereError {
    #[error("cloud of {have} points cannot support {need}-neighbor estimation")]
    InsufficientNeighbors { have: usize, need: usize },
    #[error("bad magic in stack file: {0:?}")]
    BadMagic([u8; 4]),
    #[error("truncated stack file: {0}")]
    Truncated(String),
    #[error("i/o failure: {0}")]
    Io(String),
}
