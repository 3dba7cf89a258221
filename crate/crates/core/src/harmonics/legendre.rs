//! Orthonormal associated Legendre functions.
//!
//! `nlm(l, m, x)` returns the colatitude part of the orthonormal spherical
//! harmonic with the Condon-Shortley phase, so that
//! Y_lm(theta, phi) = nlm(l, m, cos phi) * exp(i m theta) and
//! Y_00 = 1/sqrt(4 pi). Negative orders follow nlm(l,-m) = (-1)^m nlm(l,m).

/// Values at a fixed node set for all 0 <= m <= l < bandwidth.
pub struct LegendreTable {
    bandwidth: usize,
    nodes: usize,
    /// Indexed by [offset(l, m) * nodes + j].
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn new(bandwidth: usize, cos_nodes: &[f64]) -> LegendreTable {
        let nodes = cos_nodes.len();
        let pairs = bandwidth * (bandwidth + 1) / 2;
        let mut values = vec![0.0; pairs * nodes];
        for (j, &x) in cos_nodes.iter().enumerate() {
            let col = eval_all(bandwidth, x);
            for (pair, v) in col.iter().enumerate() {
                values[pair * nodes + j] = *v;
            }
        }
        LegendreTable { bandwidth, nodes, values }
    }

    /// Slice of nlm(l, m, x_j) over all nodes j.
    pub fn row(&self, l: usize, m: usize) -> &[f64] {
        debug_assert!(l < self.bandwidth && m <= l);
        let start = pair_index(self.bandwidth, l, m) * self.nodes;
        &self.values[start..start + self.nodes]
    }
}

/// All nlm(l, m, x) for 0 <= m <= l < bandwidth at one x, packed as in
/// `LegendreTable`.
fn eval_all(bandwidth: usize, x: f64) -> Vec<f64> {
    let pairs = bandwidth * (bandwidth + 1) / 2;
    let mut out = vec![0.0; pairs];
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 0..bandwidth {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        let mut prev2 = pmm;
        set(&mut out, bandwidth, m, m, prev2);
        if m + 1 < bandwidth {
            let mut prev1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
            set(&mut out, bandwidth, m + 1, m, prev1);
            for l in (m + 2)..bandwidth {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let next = a * (x * prev1 - b * prev2);
                set(&mut out, bandwidth, l, m, next);
                prev2 = prev1;
                prev1 = next;
            }
        }
    }
    out
}

/// Pairs are ordered by m, then l: (0,0),(1,0)..(B-1,0),(1,1),(2,1),...
/// so the offset is sum_{m'<m} (bandwidth - m') + (l - m).
#[inline]
fn pair_index(bandwidth: usize, l: usize, m: usize) -> usize {
    m * bandwidth - m * (m.saturating_sub(1)) / 2 + (l - m)
}

#[inline]
fn set(out: &mut [f64], bandwidth: usize, l: usize, m: usize, v: f64) {
    out[pair_index(bandwidth, l, m)] = v;
}

/// nlm at a single point, by the same recurrences as the tables.
pub fn nlm(l: usize, m_signed: i64, x: f64) -> f64 {
    let m = m_signed.unsigned_abs() as usize;
    debug_assert!(m <= l);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for k in 1..=m {
        pmm *= -((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let value = if l == m {
        pmm
    } else {
        let mut prev2 = pmm;
        let mut prev1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
        if l == m + 1 {
            prev1
        } else {
            let mut v = 0.0;
            for ll in (m + 2)..=l {
                let lf = ll as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                v = a * (x * prev1 - b * prev2);
                prev2 = prev1;
                prev1 = v;
            }
            v
        }
    };
    if m_signed < 0 && m % 2 == 1 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_closed_forms_for_low_degrees() {
        let inv_sqrt4pi = (1.0 / (4.0 * PI)).sqrt();
        for &x in &[-0.9f64, -0.3, 0.0, 0.4, 0.95] {
            let s = (1.0 - x * x).sqrt();
            assert!((nlm(0, 0, x) - inv_sqrt4pi).abs() < 1e-14);
            assert!((nlm(1, 0, x) - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-14);
            assert!((nlm(1, 1, x) + (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-14);
            assert!((nlm(2, 0, x) - (5.0 / (16.0 * PI)).sqrt() * (3.0 * x * x - 1.0)).abs() < 1e-14);
            assert!((nlm(2, 1, x) + (15.0 / (8.0 * PI)).sqrt() * x * s).abs() < 1e-13);
            assert!((nlm(2, 2, x) - (15.0 / (32.0 * PI)).sqrt() * s * s).abs() < 1e-13);
        }
    }

    #[test]
    fn negative_order_sign_rule() {
        for &x in &[-0.5f64, 0.2, 0.8] {
            assert_eq!(nlm(2, -1, x), -nlm(2, 1, x));
            assert_eq!(nlm(2, -2, x), nlm(2, 2, x));
            assert_eq!(nlm(3, -3, x), -nlm(3, 3, x));
        }
    }

    #[test]
    fn table_agrees_with_pointwise_evaluation() {
        let nodes: Vec<f64> = (0..16)
            .map(|j| (PI * j as f64 / 16.0).cos())
            .collect();
        let table = LegendreTable::new(8, &nodes);
        for m in 0..8usize {
            for l in m..8 {
                let row = table.row(l, m);
                for (j, &x) in nodes.iter().enumerate() {
                    assert!(
                        (row[j] - nlm(l, m as i64, x)).abs() < 1e-13,
                        "l={l} m={m} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn orthonormal_on_fine_quadrature() {
        // Integral of nlm(l,m)^2 over the sphere (with the azimuth factor)
        // must be 1: 2*pi * int nlm^2 sin(phi) dphi = 1. Midpoint rule at
        // n=4096 resolves the integrand to well below the tolerance.
        let n = 4096;
        for (l, m) in [(0usize, 0usize), (3, 0), (5, 2), (7, 7), (12, 5)] {
            let mut acc = 0.0;
            for j in 0..n {
                let phi = PI * (j as f64 + 0.5) / n as f64;
                let v = nlm(l, m as i64, phi.cos());
                acc += v * v * phi.sin() * (PI / n as f64);
            }
            assert!(
                (acc * 2.0 * PI - 1.0).abs() < 1e-6,
                "l={l} m={m}: {}",
                acc * 2.0 * PI
            );
        }
    }
}
