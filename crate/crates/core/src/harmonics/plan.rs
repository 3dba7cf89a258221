//! Shared precomputed tables for the transforms: quadrature weights,
//! normalized associated Legendre values at the grid colatitudes, and FFT
//! plans. Plans are immutable after construction and cached globally.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

use super::legendre::LegendreTable;

/// Sine-weighted equiangular quadrature weights for colatitudes
/// phi_j = pi*j/n. The weighted sums integrate cos-polynomials up to degree
/// n-1 exactly: sum_j w_j P_l(cos phi_j) = 2 delta_{l0}.
pub fn colatitude_weights(n: usize) -> Vec<f64> {
    assert!(n % 2 == 0, "grid resolution must be even");
    let b = n / 2;
    (0..n)
        .map(|j| {
            let t = std::f64::consts::PI * j as f64 / n as f64;
            let s: f64 = (0..b)
                .map(|k| ((2 * k + 1) as f64 * t).sin() / (2 * k + 1) as f64)
                .sum();
            (4.0 / n as f64) * t.sin() * s
        })
        .collect()
}

pub struct ShtPlan {
    pub n: usize,
    pub bandwidth: usize,
    /// Per-cell quadrature weight by row: (2*pi/n) * colatitude weight.
    pub cell_weights: Vec<f64>,
    pub legendre: LegendreTable,
    pub fft_forward: Arc<dyn Fft<f64>>,
    pub fft_inverse: Arc<dyn Fft<f64>>,
}

impl ShtPlan {
    fn new(n: usize, bandwidth: usize) -> ShtPlan {
        let mut planner = FftPlanner::new();
        let cos_phi: Vec<f64> = (0..n)
            .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        ShtPlan {
            n,
            bandwidth,
            cell_weights: colatitude_weights(n)
                .into_iter()
                .map(|w| w * std::f64::consts::TAU / n as f64)
                .collect(),
            legendre: LegendreTable::new(bandwidth, &cos_phi),
            fft_forward: planner.plan_fft_forward(n),
            fft_inverse: planner.plan_fft_inverse(n),
        }
    }
}

pub fn plan(n: usize, bandwidth: usize) -> Arc<ShtPlan> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ShtPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((n, bandwidth))
        .or_insert_with(|| Arc::new(ShtPlan::new(n, bandwidth)))
        .clone()
}
