//! Reference correlation of two spherical signals over the rotation group.
//!
//! g(R) = integral over S² of f(R^{-1} x) * conj(h(x)) dx, evaluated from
//! coefficients on a ZYZ Euler grid. This is a test oracle for the
//! equivariance claims, not a production path, so the bandwidth is capped.

use num_complex::Complex64;

use super::coeffs::HarmonicCoefficients;
use super::rotate::wigner_d_matrix;
use super::HarmonicsError;

pub const SO3_BANDWIDTH_LIMIT: usize = 8;

/// Correlation values on the Euler grid alpha_a = 2*pi*a/G,
/// beta_b = pi*(b + 1/2)/G, gamma_c = 2*pi*c/G.
#[derive(Clone, Debug)]
pub struct So3Grid {
    pub resolution: usize,
    /// Row-major over (a, b, c).
    pub values: Vec<f64>,
}

impl So3Grid {
    pub fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        self.values[(a * self.resolution + b) * self.resolution + c]
    }

    pub fn alpha(&self, a: usize) -> f64 {
        std::f64::consts::TAU * a as f64 / self.resolution as f64
    }

    pub fn beta(&self, b: usize) -> f64 {
        std::f64::consts::PI * (b as f64 + 0.5) / self.resolution as f64
    }

    pub fn gamma(&self, c: usize) -> f64 {
        std::f64::consts::TAU * c as f64 / self.resolution as f64
    }
}

/// In coefficient space:
/// g(R) = sum_l sum_{m,m'} conj(h_{l,m}) D^l_{m,m'}(R) f_{l,m'}.
pub fn so3_correlate(
    f: &HarmonicCoefficients,
    h: &HarmonicCoefficients,
    resolution: usize,
) -> Result<So3Grid, HarmonicsError> {
    if f.bandwidth() != h.bandwidth() {
        return Err(HarmonicsError::BandwidthMismatch(f.bandwidth(), h.bandwidth()));
    }
    let bandwidth = f.bandwidth();
    if bandwidth > SO3_BANDWIDTH_LIMIT {
        return Err(HarmonicsError::So3BandwidthTooHigh(bandwidth));
    }
    assert!(resolution >= 1);

    let g = resolution;
    let mut values = vec![0.0; g * g * g];
    // d-matrices depend only on beta; precompute per row of the grid.
    let d_tables: Vec<Vec<Vec<f64>>> = (0..g)
        .map(|b| {
            let beta = std::f64::consts::PI * (b as f64 + 0.5) / g as f64;
            (0..bandwidth).map(|l| wigner_d_matrix(l, beta)).collect()
        })
        .collect();

    for a in 0..g {
        let alpha = std::f64::consts::TAU * a as f64 / g as f64;
        for b in 0..g {
            for c in 0..g {
                let gamma = std::f64::consts::TAU * c as f64 / g as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..bandwidth {
                    let d = &d_tables[b][l];
                    let dim = 2 * l + 1;
                    for (row, m_out) in (-(l as i64)..=(l as i64)).enumerate() {
                        let pa = Complex64::new(0.0, -(m_out as f64) * alpha).exp();
                        let hc = h.get(l, m_out).conj();
                        for (col, m_in) in (-(l as i64)..=(l as i64)).enumerate() {
                            let pg = Complex64::new(0.0, -(m_in as f64) * gamma).exp();
                            acc += hc * pa * d[row * dim + col] * pg * f.get(l, m_in);
                        }
                    }
                }
                values[(a * g + b) * g + c] = acc.re;
            }
        }
    }
    Ok(So3Grid { resolution: g, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{colatitude_weights, eval_coeffs_at, rotate_coeffs};
    use num_complex::Complex64;
    use rand_chacha::rand_core::SeedableRng;
    use std::f64::consts::{PI, TAU};

    /// Brute-force quadrature of integral f(R^{-1} x) h(x) dx on an n x n
    /// equiangular grid, evaluating both signals pointwise.
    fn correlate_by_quadrature(
        f: &HarmonicCoefficients,
        h: &HarmonicCoefficients,
        alpha: f64,
        beta: f64,
        gamma: f64,
        n: usize,
    ) -> f64 {
        let w = colatitude_weights(n);
        // R^{-1} = Rz(-gamma) Ry(-beta) Rz(-alpha)
        let (ca, sa) = ((-alpha).cos(), (-alpha).sin());
        let (cb, sb) = ((-beta).cos(), (-beta).sin());
        let (cg, sg) = ((-gamma).cos(), (-gamma).sin());
        let rz_a = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
        let ry_b = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
        let rz_g = [[cg, -sg, 0.0], [sg, cg, 0.0], [0.0, 0.0, 1.0]];
        let m = mat_mul(&rz_g, &mat_mul(&ry_b, &rz_a));

        let mut acc = 0.0;
        for i in 0..n {
            let theta = TAU * i as f64 / n as f64;
            for j in 0..n {
                let phi = PI * j as f64 / n as f64;
                let x = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
                let p = [
                    m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
                    m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
                    m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
                ];
                let mut t2 = p[1].atan2(p[0]);
                if t2 < 0.0 {
                    t2 += TAU;
                }
                let p2 = p[2].clamp(-1.0, 1.0).acos();
                let fv = eval_coeffs_at(f, t2, p2);
                let hv = eval_coeffs_at(h, theta, phi);
                acc += (fv * hv.conj()).re * w[j] * TAU / n as f64;
            }
        }
        acc
    }

    fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    out[r][c] += a[r][k] * b[k][c];
                }
            }
        }
        out
    }

    #[test]
    fn monopole_pair_is_constant_and_matches_quadrature() {
        let mut f = HarmonicCoefficients::zeros(2);
        f.set(0, 0, Complex64::new(1.0, 0.0));
        let h = f.clone();
        let grid = so3_correlate(&f, &h, 4).unwrap();
        let expect = correlate_by_quadrature(&f, &h, grid.alpha(1), grid.beta(2), grid.gamma(3), 16);
        for v in &grid.values {
            assert!((v - expect).abs() < 1e-3, "{v} vs {expect}");
        }
        // Two unit-norm monopoles correlate to exactly 1 at every rotation.
        assert!((grid.values[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_template_gives_zero_everywhere() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let f = HarmonicCoefficients::random_real(4, &mut rng);
        let h = HarmonicCoefficients::zeros(4);
        let grid = so3_correlate(&f, &h, 3).unwrap();
        assert!(grid.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn matches_brute_force_quadrature_at_low_bandwidth() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = HarmonicCoefficients::random_real(4, &mut rng);
        let h = HarmonicCoefficients::random_real(4, &mut rng);
        let grid = so3_correlate(&f, &h, 4).unwrap();
        for (a, b, c) in [(0usize, 0usize, 0usize), (1, 2, 3), (3, 1, 0), (2, 3, 2)] {
            let expect =
                correlate_by_quadrature(&f, &h, grid.alpha(a), grid.beta(b), grid.gamma(c), 16);
            assert!(
                (grid.at(a, b, c) - expect).abs() < 1e-3,
                "({a},{b},{c}): {} vs {expect}",
                grid.at(a, b, c)
            );
        }
    }

    #[test]
    fn rotating_the_query_left_shifts_the_gamma_axis() {
        // correlate(L_Q f, h)(R) = correlate(f, h)(R Q); with Q a z-rotation
        // by one gamma step the grid shifts along gamma.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let f = HarmonicCoefficients::random_real(4, &mut rng);
        let h = HarmonicCoefficients::random_real(4, &mut rng);
        let g = 6;
        let base = so3_correlate(&f, &h, g).unwrap();
        let shift = TAU / g as f64;
        let rotated = so3_correlate(&rotate_coeffs(&f, shift, 0.0, 0.0), &h, g).unwrap();
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    let expect = base.at(a, b, (c + 1) % g);
                    assert!(
                        (rotated.at(a, b, c) - expect).abs() < 1e-3,
                        "({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn bandwidth_cap_is_enforced() {
        let f = HarmonicCoefficients::zeros(9);
        let h = HarmonicCoefficients::zeros(9);
        assert_eq!(
            so3_correlate(&f, &h, 2).unwrap_err(),
            HarmonicsError::So3BandwidthTooHigh(9)
        );
    }
}
