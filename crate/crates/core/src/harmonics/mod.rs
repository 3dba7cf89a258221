//! Spherical harmonic analysis and synthesis on equiangular grids, zonal
//! convolution on S², rotation operators, and a reference SO(3) correlation.
//!
//! Grids sample colatitude at phi_j = pi*j/n and azimuth at theta_i =
//! 2*pi*i/n. Forward transforms use sine-weighted equiangular quadrature
//! that integrates band-limited products exactly, so analysis inverts
//! synthesis for any bandwidth B <= n/2.

mod coeffs;
mod grid;
mod legendre;
mod plan;
mod rotate;
mod so3;
mod transform;
mod zonal;

pub use coeffs::HarmonicCoefficients;
pub use grid::SphereGrid;
pub use plan::colatitude_weights;
pub use rotate::{rotate_coeffs, rotate_signal, wigner_d_matrix, RotationSpec};
pub use so3::{so3_correlate, So3Grid, SO3_BANDWIDTH_LIMIT};
pub use transform::{
    eval_coeffs_at, grid_energy, sht_forward, sht_inverse, sht_synthesis_adjoint,
};
pub use zonal::{s2_convolve_zonal, zonal_identity_kernel, zonal_nu};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HarmonicsError {
    #[error("bandwidth {bandwidth} too high for grid n = {n} (need B <= n/2)")]
    BandwidthTooHigh { bandwidth: usize, n: usize },
    #[error("resolution {n} too low for bandwidth {bandwidth} (need n >= 2B)")]
    ResolutionTooLow { n: usize, bandwidth: usize },
    #[error("bandwidth mismatch: {0} vs {1}")]
    BandwidthMismatch(usize, usize),
    #[error("angle {angle} is not a grid multiple of 2*pi/{n}")]
    InvalidExactShift { angle: f64, n: usize },
    #[error("SO(3) correlation is a reference implementation, bandwidth {0} > {SO3_BANDWIDTH_LIMIT}")]
    So3BandwidthTooHigh(usize),
}
