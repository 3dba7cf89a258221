use crate::harmonics::SphereGrid;
use crate::scene::SemanticLabel;

/// Two-channel equiangular spherical image. Cell (i, j) covers
/// theta in [2*pi*i/n, 2*pi*(i+1)/n) and phi in [pi*j/n, pi*(j+1)/n).
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalImage {
    n: usize,
    /// Range to the closest point per cell, meters; 0 where invalid.
    pub distance: SphereGrid,
    /// |sin| of the ray/normal angle of that point; 0 where invalid.
    pub sin_alpha: SphereGrid,
    /// Azimuth-major occupancy mask, same layout as the channels.
    pub valid: Vec<bool>,
}

impl SphericalImage {
    pub fn empty(n: usize) -> SphericalImage {
        assert!(n >= 4, "projection resolution must be at least 4");
        SphericalImage {
            n,
            distance: SphereGrid::zeros(n),
            sin_alpha: SphereGrid::zeros(n),
            valid: vec![false; n * n],
        }
    }

    pub fn from_parts(
        distance: SphereGrid,
        sin_alpha: SphereGrid,
        valid: Vec<bool>,
    ) -> SphericalImage {
        let n = distance.n();
        assert_eq!(sin_alpha.n(), n);
        assert_eq!(valid.len(), n * n);
        SphericalImage { n, distance, sin_alpha, valid }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[i * self.n + j]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn is_all_sentinel(&self) -> bool {
        self.valid_count() == 0
    }

    /// Cyclic azimuth shift of both channels and the mask.
    pub fn shifted_columns(&self, shift: i64) -> SphericalImage {
        let n = self.n as i64;
        let mut valid = vec![false; self.n * self.n];
        for i in 0..self.n {
            let src = (i as i64 - shift).rem_euclid(n) as usize;
            for j in 0..self.n {
                valid[i * self.n + j] = self.valid[src * self.n + j];
            }
        }
        SphericalImage {
            n: self.n,
            distance: self.distance.shifted_columns(shift),
            sin_alpha: self.sin_alpha.shifted_columns(shift),
            valid,
        }
    }
}

/// One [`SphericalImage`] per static attribute, all at the same resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalStack {
    pub layers: [SphericalImage; 3],
}

impl SphericalStack {
    pub fn new(layers: [SphericalImage; 3]) -> SphericalStack {
        let n = layers[0].n();
        assert!(layers.iter().all(|l| l.n() == n), "stack layers must share resolution");
        SphericalStack { layers }
    }

    pub fn empty(n: usize) -> SphericalStack {
        SphericalStack {
            layers: [
                SphericalImage::empty(n),
                SphericalImage::empty(n),
                SphericalImage::empty(n),
            ],
        }
    }

    pub fn n(&self) -> usize {
        self.layers[0].n()
    }

    pub fn layer(&self, label: SemanticLabel) -> Option<&SphericalImage> {
        label.static_index().map(|i| &self.layers[i])
    }

    pub fn shifted_columns(&self, shift: i64) -> SphericalStack {
        SphericalStack {
            layers: [
                self.layers[0].shifted_columns(shift),
                self.layers[1].shifted_columns(shift),
                self.layers[2].shifted_columns(shift),
            ],
        }
    }
}
