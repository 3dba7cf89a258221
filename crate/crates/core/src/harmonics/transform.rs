//! Forward/inverse spherical harmonic transforms and related helpers.

use num_complex::Complex64;

use super::coeffs::HarmonicCoefficients;
use super::grid::SphereGrid;
use super::legendre::nlm;
use super::plan::{plan, ShtPlan};
use super::HarmonicsError;

/// Analysis: coefficients of the band-limited least-squares fit of `grid`
/// under the equiangular quadrature. Linear in the input; exact on signals
/// band-limited to `bandwidth <= n/2`.
pub fn sht_forward(
    grid: &SphereGrid,
    bandwidth: usize,
) -> Result<HarmonicCoefficients, HarmonicsError> {
    analysis(grid, bandwidth, true)
}

/// Adjoint of [`sht_inverse`] (synthesis transpose): the unweighted
/// conjugate sum over grid cells. Used by reverse-mode gradients.
pub fn sht_synthesis_adjoint(
    grid: &SphereGrid,
    bandwidth: usize,
) -> Result<HarmonicCoefficients, HarmonicsError> {
    analysis(grid, bandwidth, false)
}

fn analysis(
    grid: &SphereGrid,
    bandwidth: usize,
    weighted: bool,
) -> Result<HarmonicCoefficients, HarmonicsError> {
    let n = grid.n();
    if bandwidth == 0 || 2 * bandwidth > n {
        return Err(HarmonicsError::BandwidthTooHigh { bandwidth, n });
    }
    let plan = plan(n, bandwidth);

    // Azimuth DFT per colatitude row: G[k][j] = sum_i f(i,j) e^{-i k theta_i}.
    let spectra = azimuth_fft(grid, &plan, false);

    let mut coeffs = HarmonicCoefficients::zeros(bandwidth);
    let mut row_scratch = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..bandwidth {
        // Positive order reads DFT bin m, negative order bin n - m.
        for (j, slot) in row_scratch.iter_mut().enumerate() {
            let w = if weighted { plan.cell_weights[j] } else { 1.0 };
            *slot = spectra[m * n + j] * w;
        }
        for l in m..bandwidth {
            let leg = plan.legendre.row(l, m);
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, p) in row_scratch.iter().zip(leg.iter()) {
                acc += v * *p;
            }
            coeffs.set(l, m as i64, acc);
        }
        if m > 0 {
            let bin = n - m;
            for (j, slot) in row_scratch.iter_mut().enumerate() {
                let w = if weighted { plan.cell_weights[j] } else { 1.0 };
                *slot = spectra[bin * n + j] * w;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for l in m..bandwidth {
                let leg = plan.legendre.row(l, m);
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, p) in row_scratch.iter().zip(leg.iter()) {
                    acc += v * *p;
                }
                coeffs.set(l, -(m as i64), sign * acc);
            }
        }
    }
    Ok(coeffs)
}

/// Synthesis: evaluate sum c_{l,m} Y_{l,m} on the n x n grid.
/// `sht_forward(sht_inverse(c)) == c` for any conjugate-symmetric c with
/// n >= 2 * bandwidth.
pub fn sht_inverse(
    coeffs: &HarmonicCoefficients,
    n: usize,
) -> Result<SphereGrid, HarmonicsError> {
    let bandwidth = coeffs.bandwidth();
    if 2 * bandwidth > n {
        return Err(HarmonicsError::ResolutionTooLow { n, bandwidth });
    }
    let plan = plan(n, bandwidth);

    // g_m(j) = sum_l c_{l,m} nlm(l, m, x_j), placed at the DFT bin of m.
    let mut bins = vec![Complex64::new(0.0, 0.0); n * n]; // [bin][j]
    for m in 0..bandwidth {
        for l in m..bandwidth {
            let leg = plan.legendre.row(l, m);
            let c_pos = coeffs.get(l, m as i64);
            for j in 0..n {
                bins[m * n + j] += c_pos * leg[j];
            }
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let c_neg = coeffs.get(l, -(m as i64)) * sign;
                let bin = n - m;
                for j in 0..n {
                    bins[bin * n + j] += c_neg * leg[j];
                }
            }
        }
    }

    // f(i, j) = sum_m g_m(j) e^{+i m theta_i}: inverse DFT over bins.
    let mut grid = SphereGrid::zeros(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for (k, slot) in scratch.iter_mut().enumerate() {
            *slot = bins[k * n + j];
        }
        plan.fft_inverse.process(&mut scratch);
        for i in 0..n {
            grid.set(i, j, scratch[i].re);
        }
    }
    Ok(grid)
}

/// Grid-side energy under the quadrature weights; equals
/// [`HarmonicCoefficients::energy`] for band-limited signals (Parseval).
pub fn grid_energy(grid: &SphereGrid) -> f64 {
    let n = grid.n();
    let plan = plan(n, 1);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += grid.at(i, j) * grid.at(i, j) * plan.cell_weights[j];
        }
    }
    acc
}

/// Pointwise synthesis at an arbitrary direction, independent of any grid.
pub fn eval_coeffs_at(coeffs: &HarmonicCoefficients, theta: f64, phi: f64) -> Complex64 {
    let x = phi.cos();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..coeffs.bandwidth() {
        for m in -(l as i64)..=(l as i64) {
            let y = nlm(l, m, x) * Complex64::new(0.0, m as f64 * theta).exp();
            acc += coeffs.get(l, m) * y;
        }
    }
    acc
}

fn azimuth_fft(grid: &SphereGrid, plan: &ShtPlan, _inverse: bool) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n]; // [bin][j]
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for (i, slot) in scratch.iter_mut().enumerate() {
            *slot = Complex64::new(grid.at(i, j), 0.0);
        }
        plan.fft_forward.process(&mut scratch);
        for (k, v) in scratch.iter().enumerate() {
            out[k * n + j] = *v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use std::f64::consts::PI;

    const SQRT_4PI: f64 = 3.5449077018110318;

    #[test]
    fn constant_grid_maps_to_pure_monopole() {
        let grid = SphereGrid::from_fn(16, |_, _| 1.0);
        let c = sht_forward(&grid, 8).unwrap();
        assert!((c.get(0, 0).re - SQRT_4PI).abs() < 1e-6, "{}", c.get(0, 0));
        assert!(c.get(0, 0).im.abs() < 1e-9);
        for l in 1..8usize {
            for m in -(l as i64)..=(l as i64) {
                assert!(c.get(l, m).norm() < 1e-9, "l={l} m={m}: {}", c.get(l, m));
            }
        }
    }

    #[test]
    fn sampled_basis_function_recovers_unit_coefficient() {
        let grid = SphereGrid::from_fn(16, |_, phi| nlm(1, 0, phi.cos()));
        let c = sht_forward(&grid, 8).unwrap();
        assert!((c.get(1, 0).re - 1.0).abs() < 1e-6);
        for l in 0..8usize {
            for m in -(l as i64)..=(l as i64) {
                if (l, m) != (1, 0) {
                    assert!(c.get(l, m).norm() < 1e-9, "l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn zero_grid_gives_zero_coefficients() {
        let c = sht_forward(&SphereGrid::zeros(8), 4).unwrap();
        assert!(c.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn zero_coefficients_give_zero_grid() {
        let g = sht_inverse(&HarmonicCoefficients::zeros(4), 8).unwrap();
        assert!(g.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn monopole_synthesizes_constant_one() {
        let mut c = HarmonicCoefficients::zeros(4);
        c.set(0, 0, num_complex::Complex64::new(SQRT_4PI, 0.0));
        let g = sht_inverse(&c, 8).unwrap();
        for v in g.data() {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bandwidth_and_resolution_limits_are_enforced() {
        assert_eq!(
            sht_forward(&SphereGrid::zeros(8), 5).unwrap_err(),
            HarmonicsError::BandwidthTooHigh { bandwidth: 5, n: 8 }
        );
        assert_eq!(
            sht_inverse(&HarmonicCoefficients::zeros(5), 8).unwrap_err(),
            HarmonicsError::ResolutionTooLow { n: 8, bandwidth: 5 }
        );
    }

    #[test]
    fn round_trip_on_random_band_limited_signals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let c = HarmonicCoefficients::random_real(8, &mut rng);
            let grid = sht_inverse(&c, 16).unwrap();
            let back = sht_forward(&grid, 8).unwrap();
            let scale = c.energy().sqrt();
            assert!(back.max_abs_diff(&c) / scale < 1e-9);
        }
    }

    #[test]
    fn parseval_holds_for_band_limited_signals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let c = HarmonicCoefficients::random_real(8, &mut rng);
            let grid = sht_inverse(&c, 16).unwrap();
            let eg = grid_energy(&grid);
            let ec = c.energy();
            assert!((eg - ec).abs() / ec.max(1e-300) < 1e-9, "{eg} vs {ec}");
        }
    }

    #[test]
    fn analysis_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let a = sht_inverse(&HarmonicCoefficients::random_real(6, &mut rng), 16).unwrap();
        let b = sht_inverse(&HarmonicCoefficients::random_real(6, &mut rng), 16).unwrap();
        let combo = SphereGrid::from_data(
            16,
            a.data()
                .iter()
                .zip(b.data().iter())
                .map(|(x, y)| 2.0 * x - 0.5 * y)
                .collect(),
        );
        let ca = sht_forward(&a, 6).unwrap();
        let cb = sht_forward(&b, 6).unwrap();
        let cc = sht_forward(&combo, 6).unwrap();
        for (k, v) in cc.data().iter().enumerate() {
            let expect = 2.0 * ca.data()[k] - 0.5 * cb.data()[k];
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn pointwise_eval_matches_grid_synthesis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = HarmonicCoefficients::random_real(5, &mut rng);
        let grid = sht_inverse(&c, 12).unwrap();
        for (i, j) in [(0usize, 3usize), (5, 7), (11, 1)] {
            let theta = 2.0 * PI * i as f64 / 12.0;
            let phi = PI * j as f64 / 12.0;
            let v = eval_coeffs_at(&c, theta, phi);
            assert!((v.re - grid.at(i, j)).abs() < 1e-10);
            assert!(v.im.abs() < 1e-10);
        }
    }
}
