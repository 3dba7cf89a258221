/// Real-valued n x n samples on the sphere, azimuth-major: entry `(i, j)`
/// holds the value at theta_i = 2*pi*i/n, phi_j = pi*j/n.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    n: usize,
    data: Vec<f64>,
}

impl SphereGrid {
    pub fn zeros(n: usize) -> SphereGrid {
        assert!(n >= 2, "grid resolution must be at least 2");
        SphereGrid { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> f64) -> SphereGrid {
        let mut grid = SphereGrid::zeros(n);
        for i in 0..n {
            let theta = std::f64::consts::TAU * i as f64 / n as f64;
            for j in 0..n {
                let phi = std::f64::consts::PI * j as f64 / n as f64;
                grid.data[i * n + j] = f(theta, phi);
            }
        }
        grid
    }

    pub fn from_data(n: usize, data: Vec<f64>) -> SphereGrid {
        assert_eq!(data.len(), n * n, "grid data must hold n*n samples");
        SphereGrid { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Azimuth angle of column i.
    pub fn theta(&self, i: usize) -> f64 {
        std::f64::consts::TAU * i as f64 / self.n as f64
    }

    /// Colatitude of row j.
    pub fn phi(&self, j: usize) -> f64 {
        std::f64::consts::PI * j as f64 / self.n as f64
    }

    /// Cyclic shift of azimuth columns: output column i holds input column
    /// (i - shift) mod n. This is the exact z-rotation by 2*pi*shift/n.
    pub fn shifted_columns(&self, shift: i64) -> SphereGrid {
        let n = self.n as i64;
        let mut out = SphereGrid::zeros(self.n);
        for i in 0..self.n {
            let src = (i as i64 - shift).rem_euclid(n) as usize;
            for j in 0..self.n {
                out.data[i * self.n + j] = self.data[src * self.n + j];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SphereGrid) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
