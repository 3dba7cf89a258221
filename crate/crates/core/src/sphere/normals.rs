//! Per-point surface normals from least-squares plane fits.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::scene::SemanticPointCloud;

use super::SphereError;

/// Ratio below which the mid eigenvalue marks a collinear neighborhood.
const DEGENERACY_RATIO: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct NormalEstimate {
    /// Unit normal, sign-oriented toward the sensor origin.
    pub normal: [f64; 3],
    /// True when the plane fit degenerated and the radial fallback was used.
    pub degenerate: bool,
}

/// Fit a plane through the k nearest neighbors of each point (the point
/// itself included) and take the smallest-variance direction. Collinear
/// neighborhoods fall back to the radial direction, flagged.
pub fn estimate_normals(
    cloud: &SemanticPointCloud,
    k: usize,
) -> Result<Vec<NormalEstimate>, SphereError> {
    let need = k.max(3);
    if cloud.len() < need || k < 3 {
        return Err(SphereError::InsufficientNeighbors { have: cloud.len(), need });
    }
    let pts = &cloud.points;
    let mut out = Vec::with_capacity(pts.len());
    let mut dist_heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for p in pts.iter() {
        // k nearest by a bounded max-heap over squared distance.
        dist_heap.clear();
        for (other_idx, q) in pts.iter().enumerate() {
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if dist_heap.len() < k {
                dist_heap.push((d2, other_idx));
                if dist_heap.len() == k {
                    dist_heap.sort_by(|a, b| b.0.total_cmp(&a.0));
                }
            } else if d2 < dist_heap[0].0 {
                dist_heap[0] = (d2, other_idx);
                let mut i = 0;
                while i + 1 < dist_heap.len() && dist_heap[i].0 < dist_heap[i + 1].0 {
                    dist_heap.swap(i, i + 1);
                    i += 1;
                }
            }
        }

        let mut mean = Vector3::zeros();
        for (_, ni) in &dist_heap {
            mean += Vector3::from(pts[*ni]);
        }
        mean /= dist_heap.len() as f64;
        let mut cov = Matrix3::zeros();
        for (_, ni) in &dist_heap {
            let d = Vector3::from(pts[*ni]) - mean;
            cov += d * d.transpose();
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: [usize; 3] = [0, 1, 2];
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let (lo, mid, hi) = (order[0], order[1], order[2]);
        let degenerate =
            eig.eigenvalues[hi] <= 0.0 || eig.eigenvalues[mid] < DEGENERACY_RATIO * eig.eigenvalues[hi];

        let normal = if degenerate {
            radial_fallback(*p)
        } else {
            let v = eig.eigenvectors.column(lo);
            let mut n = [v[0], v[1], v[2]];
            let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            for c in &mut n {
                *c /= norm;
            }
            orient_toward_origin(n, *p)
        };
        out.push(NormalEstimate { normal, degenerate });
    }
    Ok(out)
}

/// Unit vector from the point toward the sensor origin.
pub fn radial_fallback(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r < 1e-12 {
        [0.0, 0.0, 1.0]
    } else {
        [-p[0] / r, -p[1] / r, -p[2] / r]
    }
}

fn orient_toward_origin(n: [f64; 3], p: [f64; 3]) -> [f64; 3] {
    // dot(normal, -p) >= 0
    if n[0] * p[0] + n[1] * p[1] + n[2] * p[2] > 0.0 {
        [-n[0], -n[1], -n[2]]
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SemanticLabel;

    fn cloud_of(points: Vec<[f64; 3]>) -> SemanticPointCloud {
        let n = points.len();
        SemanticPointCloud::new(points, vec![SemanticLabel::Ground; n])
    }

    #[test]
    fn planar_points_get_the_plane_normal_toward_the_sensor() {
        // A patch of the plane z = -1.5 as seen from a sensor at the origin.
        let mut pts = Vec::new();
        for ix in 0..6 {
            for iy in 0..6 {
                pts.push([ix as f64 * 0.4 + 1.0, iy as f64 * 0.4 - 1.2, -1.5]);
            }
        }
        let cloud = cloud_of(pts);
        let normals = estimate_normals(&cloud, 10).unwrap();
        for est in &normals {
            assert!(!est.degenerate);
            assert!((est.normal[0]).abs() < 1e-6);
            assert!((est.normal[1]).abs() < 1e-6);
            assert!((est.normal[2] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let cloud = cloud_of(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(
            estimate_normals(&cloud, 3).unwrap_err(),
            SphereError::InsufficientNeighbors { have: 2, need: 3 }
        );
    }

    #[test]
    fn collinear_points_fall_back_to_unit_radial_normals() {
        let pts: Vec<[f64; 3]> = (0..8).map(|i| [2.0 + i as f64 * 0.3, 0.0, 0.0]).collect();
        let normals = estimate_normals(&cloud_of(pts), 4).unwrap();
        for est in &normals {
            assert!(est.degenerate);
            let norm = est
                .normal
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            // Radial fallback points back toward the origin.
            assert!(est.normal[0] < 0.0);
        }
    }

    #[test]
    fn normals_are_unit_length_and_origin_facing_on_random_data() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<[f64; 3]> = (0..80)
            .map(|_| {
                [
                    rng.gen_range(2.0..8.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-2.0..2.0),
                ]
            })
            .collect();
        let cloud = cloud_of(pts.clone());
        for est in estimate_normals(&cloud, 6).unwrap().iter().zip(pts.iter()) {
            let (e, p) = est;
            let norm = e.normal.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
            let dot = e.normal[0] * p[0] + e.normal[1] * p[1] + e.normal[2] * p[2];
            assert!(dot <= 1e-12, "normal not oriented toward origin: dot = {dot}");
        }
    }
}
