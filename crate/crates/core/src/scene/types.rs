use nalgebra::{UnitQuaternion, Vector3};

pub type Point3 = [f64; 3];

/// Semantic class of a LiDAR return.
///
/// Labels 1..=3 form the static attribute set used for feature extraction;
/// dynamic returns (4) never reach the embedding, unlabeled (0) is kept in
/// maps but dropped at projection time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SemanticLabel {
    Unlabeled = 0,
    Ground = 1,
    Building = 2,
    StaticStructure = 3,
    Dynamic = 4,
}

impl SemanticLabel {
    pub const STATIC: [SemanticLabel; 3] = [
        SemanticLabel::Ground,
        SemanticLabel::Building,
        SemanticLabel::StaticStructure,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<SemanticLabel> {
        match code {
            0 => Some(SemanticLabel::Unlabeled),
            1 => Some(SemanticLabel::Ground),
            2 => Some(SemanticLabel::Building),
            3 => Some(SemanticLabel::StaticStructure),
            4 => Some(SemanticLabel::Dynamic),
            _ => None,
        }
    }

    pub fn is_static(self) -> bool {
        matches!(
            self,
            SemanticLabel::Ground | SemanticLabel::Building | SemanticLabel::StaticStructure
        )
    }

    /// Index 0..3 of a static label within [`SemanticLabel::STATIC`].
    pub fn static_index(self) -> Option<usize> {
        match self {
            SemanticLabel::Ground => Some(0),
            SemanticLabel::Building => Some(1),
            SemanticLabel::StaticStructure => Some(2),
            _ => None,
        }
    }
}

/// 3D points with per-point semantic labels; `points.len() == labels.len()`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SemanticPointCloud {
    pub points: Vec<Point3>,
    pub labels: Vec<SemanticLabel>,
}

impl SemanticPointCloud {
    pub fn new(points: Vec<Point3>, labels: Vec<SemanticLabel>) -> SemanticPointCloud {
        assert_eq!(points.len(), labels.len(), "points/labels length mismatch");
        SemanticPointCloud { points, labels }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point3, label: SemanticLabel) {
        self.points.push(p);
        self.labels.push(label);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point3, SemanticLabel)> {
        self.points.iter().zip(self.labels.iter().copied())
    }

    /// Rigid transform of every point; labels unchanged.
    pub fn transformed(&self, pose: &Pose) -> SemanticPointCloud {
        SemanticPointCloud {
            points: self.points.iter().map(|p| pose.apply(*p)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Partition into the three static attribute clouds; labels 0 and 4 are
    /// discarded.
    pub fn filter_static(&self) -> StaticPartition {
        let mut parts = StaticPartition::default();
        for (p, label) in self.iter() {
            if let Some(idx) = label.static_index() {
                parts.clouds[idx].push(*p, label);
            }
        }
        parts
    }
}

/// The three static-attribute clouds produced by
/// [`SemanticPointCloud::filter_static`], indexed by ground / building /
/// static-structure.
#[derive(Clone, Debug, Default)]
pub struct StaticPartition {
    pub clouds: [SemanticPointCloud; 3],
}

impl StaticPartition {
    pub fn by_label(&self, label: SemanticLabel) -> Option<&SemanticPointCloud> {
        label.static_index().map(|i| &self.clouds[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (SemanticLabel, &SemanticPointCloud)> {
        SemanticLabel::STATIC.iter().copied().zip(self.clouds.iter())
    }
}

/// Rigid body pose: rotation (unit quaternion) followed by translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub translation: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose {
            translation: Vector3::zeros(),
            rotation: UnitQuaternion::identity(),
        }
    }

    pub fn new(translation: [f64; 3], rotation: UnitQuaternion<f64>) -> Pose {
        Pose {
            translation: Vector3::from(translation),
            rotation,
        }
    }

    pub fn from_translation(t: [f64; 3]) -> Pose {
        Pose::new(t, UnitQuaternion::identity())
    }

    /// Rotation about +z by `angle` radians, no translation.
    pub fn from_yaw(angle: f64) -> Pose {
        Pose::new([0.0; 3], UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle))
    }

    /// p' = R p + t
    pub fn apply(&self, p: Point3) -> Point3 {
        let v = self.rotation * Vector3::from(p) + self.translation;
        [v.x, v.y, v.z]
    }

    pub fn inverse(&self) -> Pose {
        let inv_rot = self.rotation.inverse();
        Pose {
            translation: -(inv_rot * self.translation),
            rotation: inv_rot,
        }
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            translation: self.rotation * other.translation + self.translation,
            rotation: self.rotation * other.rotation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_codes_round_trip() {
        for code in 0..=4u8 {
            assert_eq!(SemanticLabel::from_code(code).unwrap().code(), code);
        }
        assert!(SemanticLabel::from_code(5).is_none());
    }

    #[test]
    fn static_set_excludes_dynamic_and_unlabeled() {
        assert!(!SemanticLabel::Dynamic.is_static());
        assert!(!SemanticLabel::Unlabeled.is_static());
        assert_eq!(SemanticLabel::STATIC.len(), 3);
    }

    #[test]
    fn identity_pose_is_noop() {
        let cloud = SemanticPointCloud::new(
            vec![[1.0, 2.0, 3.0], [-4.0, 0.5, 9.0]],
            vec![SemanticLabel::Ground, SemanticLabel::Building],
        );
        assert_eq!(cloud.transformed(&Pose::identity()), cloud);
    }

    #[test]
    fn quarter_turn_about_z() {
        let pose = Pose::from_yaw(std::f64::consts::FRAC_PI_2);
        let p = pose.apply([1.0, 0.0, 0.0]);
        assert!((p[0]).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
        assert!((p[2]).abs() < 1e-12);
    }

    #[test]
    fn transform_then_inverse_restores_points() {
        let pose = Pose::new(
            [3.0, -1.0, 0.5],
            UnitQuaternion::from_euler_angles(0.3, -0.2, 1.1),
        );
        let cloud = SemanticPointCloud::new(
            vec![[1.0, 2.0, 3.0], [0.0, -5.0, 2.0], [7.0, 7.0, -7.0]],
            vec![SemanticLabel::Ground; 3],
        );
        let back = cloud.transformed(&pose).transformed(&pose.inverse());
        for (a, b) in back.points.iter().zip(cloud.points.iter()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rigid_transform_preserves_pairwise_distances() {
        let pose = Pose::new(
            [0.1, 0.2, -0.3],
            UnitQuaternion::from_euler_angles(0.7, 0.1, -0.4),
        );
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-2.0, 4.0, 1.0], [5.0, -3.0, 2.0]];
        let cloud = SemanticPointCloud::new(pts.clone(), vec![SemanticLabel::Ground; 4]);
        let moved = cloud.transformed(&pose);
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d0 = dist(pts[i], pts[j]);
                let d1 = dist(moved.points[i], moved.points[j]);
                assert!((d0 - d1).abs() < 1e-9, "pair ({i},{j}): {d0} vs {d1}");
            }
        }
    }

    #[test]
    fn filter_static_partitions_and_covers() {
        let mut cloud = SemanticPointCloud::default();
        cloud.push([0.0, 0.0, 0.0], SemanticLabel::Ground);
        cloud.push([1.0, 0.0, 0.0], SemanticLabel::Ground);
        cloud.push([2.0, 0.0, 0.0], SemanticLabel::Dynamic);
        cloud.push([3.0, 0.0, 0.0], SemanticLabel::Building);
        let parts = cloud.filter_static();
        assert_eq!(parts.by_label(SemanticLabel::Ground).unwrap().len(), 2);
        assert_eq!(parts.by_label(SemanticLabel::Building).unwrap().len(), 1);
        assert_eq!(parts.by_label(SemanticLabel::StaticStructure).unwrap().len(), 0);
        let total: usize = parts.clouds.iter().map(|c| c.len()).sum();
        let expected = cloud.labels.iter().filter(|l| l.is_static()).count();
        assert_eq!(total, expected);
    }

    #[test]
    fn filter_static_of_dynamic_only_cloud_is_empty() {
        let cloud = SemanticPointCloud::new(
            vec![[1.0, 1.0, 1.0]; 3],
            vec![SemanticLabel::Dynamic; 3],
        );
        let parts = cloud.filter_static();
        assert!(parts.clouds.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn filter_static_of_empty_cloud_is_empty() {
        let parts = SemanticPointCloud::default().filter_static();
        assert!(parts.clouds.iter().all(|c| c.is_empty()));
    }

    fn dist(a: Point3, b: Point3) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}
