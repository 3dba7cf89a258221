//! Viewpoint-free LiDAR place recognition.
//!
//! The pipeline turns noisy-odometry scan streams into orientation-invariant
//! global place descriptors and evaluates retrieval under controlled
//! viewpoint offsets:
//!
//! 1. [`scene`] — labeled point clouds, poses, synthetic scenarios, file I/O.
//! 2. [`dom`] — dynamic octree occupancy mapping with log-odds measurement
//!    updates and motion-uncertainty attenuation.
//! 3. [`sphere`] — per-attribute two-channel spherical projections.
//! 4. [`harmonics`] — spherical harmonic transforms, zonal convolution on S²,
//!    rotation operators, and a reference SO(3) correlation.
//! 5. [`embed`] — the parallel per-attribute embedding network with VLAD
//!    aggregation, plus exact reverse-mode gradients.
//! 6. [`train`] — tuple mining and divergence metric learning.
//! 7. [`eval`] — descriptor indexing, retrieval metrics, sequence matching,
//!    and viewpoint sweeps.

pub mod dom;
pub mod embed;
pub mod eval;
pub mod harmonics;
pub mod scene;
pub mod sphere;
pub mod train;
