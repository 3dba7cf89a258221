//! Cell binning of labeled clouds into spherical images.

use crate::scene::{SemanticPointCloud, StaticPartition};

use super::image::{SphericalImage, SphericalStack};
use super::normals::{estimate_normals, radial_fallback, NormalEstimate};
use super::SphereError;

const ZERO_RANGE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default)]
pub struct ProjectStats {
    /// Points at the origin that cannot define a direction.
    pub zero_range_dropped: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LayerStats {
    pub points: usize,
    pub degenerate_normals: usize,
    pub zero_range_dropped: usize,
    /// True when the attribute had too few points for a plane fit and all
    /// normals fell back to the radial direction.
    pub radial_fallback_layer: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StackStats {
    pub layers: [LayerStats; 3],
}

/// Project one attribute cloud. Each cell keeps the point closest to the
/// sensor: channel one is its range, channel two |sin| of the angle between
/// the ray toward it and its normal.
pub fn project_attribute(
    cloud: &SemanticPointCloud,
    normals: &[NormalEstimate],
    n: usize,
) -> (SphericalImage, ProjectStats) {
    assert_eq!(cloud.len(), normals.len(), "one normal per point required");
    let mut image = SphericalImage::empty(n);
    let mut stats = ProjectStats::default();
    for (p, est) in cloud.points.iter().zip(normals.iter()) {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r < ZERO_RANGE_EPS {
            stats.zero_range_dropped += 1;
            continue;
        }
        let (i, j) = cell_of(*p, r, n);
        if image.is_valid(i, j) && image.distance.at(i, j) <= r {
            continue;
        }
        let dir = [p[0] / r, p[1] / r, p[2] / r];
        let nrm = est.normal;
        let cross = [
            dir[1] * nrm[2] - dir[2] * nrm[1],
            dir[2] * nrm[0] - dir[0] * nrm[2],
            dir[0] * nrm[1] - dir[1] * nrm[0],
        ];
        let sin_alpha = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2])
            .sqrt()
            .min(1.0);
        image.distance.set(i, j, r);
        image.sin_alpha.set(i, j, sin_alpha);
        image.valid[i * n + j] = true;
    }
    (image, stats)
}

/// Azimuth/colatitude cell of a point at range r > 0.
pub fn cell_of(p: [f64; 3], r: f64, n: usize) -> (usize, usize) {
    let mut theta = p[1].atan2(p[0]);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    let i = ((theta * n as f64 / std::f64::consts::TAU) as usize).min(n - 1);
    let phi = (p[2] / r).clamp(-1.0, 1.0).acos();
    let j = ((phi * n as f64 / std::f64::consts::PI) as usize).min(n - 1);
    (i, j)
}

/// Split a local map into static attributes and project each one. Attributes
/// with no points yield all-sentinel layers; attributes below the neighbor
/// count get radial fallback normals instead of failing.
pub fn project_stack(
    local_map: &SemanticPointCloud,
    n: usize,
    k: usize,
) -> Result<(SphericalStack, StackStats), SphereError> {
    let parts: StaticPartition = local_map.filter_static();
    let mut stats = StackStats::default();
    let mut layers = Vec::with_capacity(3);
    for (idx, cloud) in parts.clouds.iter().enumerate() {
        stats.layers[idx].points = cloud.len();
        if cloud.is_empty() {
            layers.push(SphericalImage::empty(n));
            continue;
        }
        let normals = if cloud.len() >= k.max(3) {
            estimate_normals(cloud, k)?
        } else {
            stats.layers[idx].radial_fallback_layer = true;
            cloud
                .points
                .iter()
                .map(|p| NormalEstimate { normal: radial_fallback(*p), degenerate: true })
                .collect()
        };
        stats.layers[idx].degenerate_normals =
            normals.iter().filter(|e| e.degenerate).count();
        let (image, pstats) = project_attribute(cloud, &normals, n);
        stats.layers[idx].zero_range_dropped = pstats.zero_range_dropped;
        layers.push(image);
    }
    let stack = SphericalStack::new([
        layers.remove(0),
        layers.remove(0),
        layers.remove(0),
    ]);
    Ok((stack, stats))
}
