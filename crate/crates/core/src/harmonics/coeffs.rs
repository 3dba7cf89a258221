use num_complex::Complex64;
use rand::Rng;

/// Spherical harmonic coefficients c_{l,m} for 0 <= l < B, |m| <= l, packed
/// as l^2 + l + m. The count is exactly B^2. A real grid source implies the
/// conjugate symmetry c_{l,-m} = (-1)^m conj(c_{l,m}).
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCoefficients {
    bandwidth: usize,
    data: Vec<Complex64>,
}

impl HarmonicCoefficients {
    pub fn zeros(bandwidth: usize) -> HarmonicCoefficients {
        assert!(bandwidth >= 1);
        HarmonicCoefficients { bandwidth, data: vec![Complex64::new(0.0, 0.0); bandwidth * bandwidth] }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.data[idx(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.data[idx(l, m)] = v;
    }

    #[inline]
    pub fn add(&mut self, l: usize, m: i64, v: Complex64) {
        self.data[idx(l, m)] += v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Squared l2 norm (the spectral side of the Parseval identity).
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &HarmonicCoefficients) -> f64 {
        assert_eq!(self.bandwidth, other.bandwidth);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Random coefficients with the conjugate symmetry of a real signal.
    pub fn random_real(bandwidth: usize, rng: &mut impl Rng) -> HarmonicCoefficients {
        let mut c = HarmonicCoefficients::zeros(bandwidth);
        for l in 0..bandwidth {
            c.set(l, 0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
            for m in 1..=l as i64 {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                c.set(l, m, v);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                c.set(l, -m, sign * v.conj());
            }
        }
        c
    }
}

#[inline]
fn idx(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    (l as i64 * l as i64 + l as i64 + m) as usize
}
