//! Rotation operators for spherical signals.
//!
//! The operator is (L_R f)(x) = f(R^{-1} x) with R = Rz(alpha) Ry(beta)
//! Rz(gamma). On coefficients it acts block-diagonally through Wigner-D
//! matrices; on grids a z-rotation by a grid multiple of 2*pi/n is an exact
//! cyclic column shift.

use num_complex::Complex64;

use super::coeffs::HarmonicCoefficients;
use super::grid::SphereGrid;
use super::transform::{sht_forward, sht_inverse};
use super::HarmonicsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotationSpec {
    /// z-rotation by an exact grid multiple of 2*pi/n, applied as a cyclic
    /// column shift.
    ExactShift { angle: f64 },
    /// ZYZ Euler angles, applied by band-limited resampling.
    Euler { alpha: f64, beta: f64, gamma: f64 },
}

impl RotationSpec {
    pub fn z_rotation(angle: f64) -> RotationSpec {
        RotationSpec::Euler { alpha: angle, beta: 0.0, gamma: 0.0 }
    }
}

/// Rotate a grid signal. Exact-shift mode permutes columns bit-exactly;
/// Euler mode resamples through the coefficient space at `bandwidth`.
pub fn rotate_signal(
    grid: &SphereGrid,
    spec: &RotationSpec,
    bandwidth: usize,
) -> Result<SphereGrid, HarmonicsError> {
    match *spec {
        RotationSpec::ExactShift { angle } => {
            let n = grid.n();
            let steps = angle * n as f64 / std::f64::consts::TAU;
            let rounded = steps.round();
            if (steps - rounded).abs() > 1e-9 {
                return Err(HarmonicsError::InvalidExactShift { angle, n });
            }
            Ok(grid.shifted_columns(rounded as i64))
        }
        RotationSpec::Euler { alpha, beta, gamma } => {
            let coeffs = sht_forward(grid, bandwidth)?;
            sht_inverse(&rotate_coeffs(&coeffs, alpha, beta, gamma), grid.n())
        }
    }
}

/// Rotate coefficients: out_{l,m} = sum_{m'} D^l_{m,m'}(alpha,beta,gamma)
/// in_{l,m'} with D^l_{m,m'} = e^{-i m alpha} d^l_{m,m'}(beta) e^{-i m' gamma}.
pub fn rotate_coeffs(
    coeffs: &HarmonicCoefficients,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> HarmonicCoefficients {
    let bandwidth = coeffs.bandwidth();
    let mut out = HarmonicCoefficients::zeros(bandwidth);
    for l in 0..bandwidth {
        let d = wigner_d_matrix(l, beta);
        let dim = 2 * l + 1;
        for (row, m_out) in (-(l as i64)..=(l as i64)).enumerate() {
            let phase_a = Complex64::new(0.0, -(m_out as f64) * alpha).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, m_in) in (-(l as i64)..=(l as i64)).enumerate() {
                let phase_g = Complex64::new(0.0, -(m_in as f64) * gamma).exp();
                acc += d[row * dim + col] * phase_g * coeffs.get(l, m_in);
            }
            out.set(l, m_out, phase_a * acc);
        }
    }
    out
}

/// Wigner small-d matrix d^l_{m,m'}(beta), row-major over m, m' in
/// -l..=l. Computed by the explicit sum over Jacobi-polynomial terms with
/// log-factorials; adequate for the bandwidths used here.
pub fn wigner_d_matrix(l: usize, beta: f64) -> Vec<f64> {
    let dim = 2 * l + 1;
    let lf = ln_factorials(2 * l + 1);
    let (ch, sh) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let li = l as i64;
    let mut d = vec![0.0; dim * dim];
    for (row, m1) in (-li..=li).enumerate() {
        for (col, m2) in (-li..=li).enumerate() {
            // d^l_{m1,m2}: sum over s of
            //   (-1)^{m1-m2+s} * sqrt(prod of four factorials) /
            //   ((l+m2-s)! s! (m1-m2+s)! (l-m1-s)!) * ch^{2l+m2-m1-2s} * sh^{m1-m2+2s}
            let pref = 0.5
                * (lf[(li + m1) as usize]
                    + lf[(li - m1) as usize]
                    + lf[(li + m2) as usize]
                    + lf[(li - m2) as usize]);
            let s_min = 0.max(m2 - m1);
            let s_max = (li + m2).min(li - m1);
            let mut acc = 0.0;
            let mut s = s_min;
            while s <= s_max {
                let ln_den = lf[(li + m2 - s) as usize]
                    + lf[s as usize]
                    + lf[(m1 - m2 + s) as usize]
                    + lf[(li - m1 - s) as usize];
                let sign = if (m1 - m2 + s) % 2 == 0 { 1.0 } else { -1.0 };
                let c_exp = (2 * li + m2 - m1 - 2 * s) as i32;
                let s_exp = (m1 - m2 + 2 * s) as i32;
                acc += sign * (pref - ln_den).exp() * ipow(ch, c_exp) * ipow(sh, s_exp);
                s += 1;
            }
            d[row * dim + col] = acc;
        }
    }
    d
}

fn ipow(base: f64, exp: i32) -> f64 {
    if exp == 0 {
        1.0
    } else {
        base.powi(exp)
    }
}

fn ln_factorials(up_to: usize) -> Vec<f64> {
    let mut lf = vec![0.0; up_to + 1];
    for k in 2..=up_to {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::eval_coeffs_at;
    use rand_chacha::rand_core::SeedableRng;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn identity_rotation_preserves_grid() {
        let grid = SphereGrid::from_fn(8, |t, p| (t.sin() + p.cos()) * 0.5);
        let out = rotate_signal(&grid, &RotationSpec::ExactShift { angle: 0.0 }, 4).unwrap();
        assert_eq!(out, grid);
    }

    #[test]
    fn exact_shift_by_one_column_at_n4() {
        let grid = SphereGrid::from_data(4, (0..16).map(|v| v as f64).collect());
        let out =
            rotate_signal(&grid, &RotationSpec::ExactShift { angle: TAU / 4.0 }, 2).unwrap();
        for j in 0..4 {
            assert_eq!(out.at(0, j), grid.at(3, j));
            assert_eq!(out.at(1, j), grid.at(0, j));
            assert_eq!(out.at(2, j), grid.at(1, j));
            assert_eq!(out.at(3, j), grid.at(2, j));
        }
    }

    #[test]
    fn non_grid_multiple_exact_shift_is_rejected() {
        let grid = SphereGrid::zeros(8);
        let err = rotate_signal(&grid, &RotationSpec::ExactShift { angle: 0.1 }, 4).unwrap_err();
        assert!(matches!(err, HarmonicsError::InvalidExactShift { .. }));
    }

    #[test]
    fn wigner_d_degree_one_matches_closed_form() {
        let beta = 0.7;
        let d = wigner_d_matrix(1, beta);
        let (c, s) = (beta.cos(), beta.sin());
        let r2 = std::f64::consts::SQRT_2;
        // rows/cols ordered m = -1, 0, +1
        let expect = [
            (1.0 + c) / 2.0, s / r2, (1.0 - c) / 2.0,
            -s / r2,         c,      s / r2,
            (1.0 - c) / 2.0, -s / r2, (1.0 + c) / 2.0,
        ];
        for (a, b) in d.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn wigner_d_is_orthogonal() {
        for l in [1usize, 3, 6] {
            let dim = 2 * l + 1;
            let d = wigner_d_matrix(l, 1.234);
            for r1 in 0..dim {
                for r2 in 0..dim {
                    let dot: f64 =
                        (0..dim).map(|c| d[r1 * dim + c] * d[r2 * dim + c]).sum();
                    let target = if r1 == r2 { 1.0 } else { 0.0 };
                    assert!((dot - target).abs() < 1e-10, "l={l} rows {r1},{r2}");
                }
            }
        }
    }

    #[test]
    fn z_rotation_matches_exact_column_shift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let n = 16;
        let grid =
            sht_inverse(&HarmonicCoefficients::random_real(8, &mut rng), n).unwrap();
        let angle = TAU * 3.0 / n as f64;
        let by_shift =
            rotate_signal(&grid, &RotationSpec::ExactShift { angle }, 8).unwrap();
        let by_euler = rotate_signal(
            &grid,
            &RotationSpec::Euler { alpha: angle, beta: 0.0, gamma: 0.0 },
            8,
        )
        .unwrap();
        assert!(by_shift.max_abs_diff(&by_euler) < 1e-9);
    }

    #[test]
    fn coefficient_rotation_matches_pointwise_resampling() {
        // Rotate via Wigner-D, then compare each grid sample against a
        // direct evaluation of the unrotated signal at R^{-1} x.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let c = HarmonicCoefficients::random_real(5, &mut rng);
        let (alpha, beta, gamma) = (0.4, 0.9, -1.3);
        let rc = rotate_coeffs(&c, alpha, beta, gamma);

        let rot = rot_zyz(alpha, beta, gamma);
        let inv = transpose(&rot);
        let n = 12;
        let grid = sht_inverse(&rc, n).unwrap();
        for (i, j) in [(0usize, 2usize), (3, 5), (7, 9), (10, 1)] {
            let theta = TAU * i as f64 / n as f64;
            let phi = PI * j as f64 / n as f64;
            let x = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
            let p = mat_vec(&inv, x);
            let (t2, p2) = dir_angles(p);
            let expect = eval_coeffs_at(&c, t2, p2).re;
            assert!(
                (grid.at(i, j) - expect).abs() < 1e-9,
                "cell ({i},{j}): {} vs {expect}",
                grid.at(i, j)
            );
        }
    }

    #[test]
    fn composing_z_rotations_matches_single_rotation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 16;
        let grid = sht_inverse(&HarmonicCoefficients::random_real(8, &mut rng), n).unwrap();
        let (a1, a2) = (0.37, 1.21);
        let two_step = rotate_signal(
            &rotate_signal(&grid, &RotationSpec::z_rotation(a1), 8).unwrap(),
            &RotationSpec::z_rotation(a2),
            8,
        )
        .unwrap();
        let one = rotate_signal(&grid, &RotationSpec::z_rotation(a1 + a2), 8).unwrap();
        let scale = grid.data().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(two_step.max_abs_diff(&one) / scale < 1e-6);
    }

    fn rot_zyz(alpha: f64, beta: f64, gamma: f64) -> [[f64; 3]; 3] {
        let rz = |a: f64| {
            [
                [a.cos(), -a.sin(), 0.0],
                [a.sin(), a.cos(), 0.0],
                [0.0, 0.0, 1.0],
            ]
        };
        let ry = |b: f64| {
            [
                [b.cos(), 0.0, b.sin()],
                [0.0, 1.0, 0.0],
                [-b.sin(), 0.0, b.cos()],
            ]
        };
        mat_mul(&mat_mul(&rz(alpha), &ry(beta)), &rz(gamma))
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

    fn transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = a[c][r];
            }
        }
        out
    }

    fn mat_vec(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r] += a[r][c] * v[c];
            }
        }
        out
    }

    fn dir_angles(p: [f64; 3]) -> (f64, f64) {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let mut theta = p[1].atan2(p[0]);
        if theta < 0.0 {
            theta += TAU;
        }
        (theta, (p[2] / r).clamp(-1.0, 1.0).acos())
    }
}
