//! Convolution with zonal (axially symmetric) kernels.
//!
//! In coefficient space the operation is diagonal per degree:
//! out_{l,m} = in_{l,m} * h_l * nu_l with nu_l = sqrt(4*pi / (2l + 1)),
//! so it commutes exactly with every rotation.

use super::coeffs::HarmonicCoefficients;
use super::HarmonicsError;

/// nu_l = sqrt(4*pi / (2l + 1)).
pub fn zonal_nu(l: usize) -> f64 {
    (4.0 * std::f64::consts::PI / (2 * l + 1) as f64).sqrt()
}

/// The kernel spectrum whose convolution is the identity: h_l = 1 / nu_l.
pub fn zonal_identity_kernel(bandwidth: usize) -> Vec<f64> {
    (0..bandwidth).map(|l| 1.0 / zonal_nu(l)).collect()
}

/// Convolve `f` with the zonal kernel whose per-degree spectrum is `kernel`.
pub fn s2_convolve_zonal(
    f: &HarmonicCoefficients,
    kernel: &[f64],
) -> Result<HarmonicCoefficients, HarmonicsError> {
    if kernel.len() != f.bandwidth() {
        return Err(HarmonicsError::BandwidthMismatch(f.bandwidth(), kernel.len()));
    }
    let mut out = HarmonicCoefficients::zeros(f.bandwidth());
    for l in 0..f.bandwidth() {
        let scale = kernel[l] * zonal_nu(l);
        for m in -(l as i64)..=(l as i64) {
            out.set(l, m, f.get(l, m) * scale);
        }
    }
    Ok(out)
}
