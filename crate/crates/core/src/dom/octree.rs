use std::collections::HashMap;

use crate::scene::{Point3, Pose, SemanticLabel, SemanticPointCloud};

use super::raycast::line_voxels;
use super::{inv_logit, logit, LOG_ODDS_CLAMP, PRUNE_EPSILON};

pub type VoxelIndex = [i32; 3];

/// Inverse sensor model: occupancy evidence for the return voxel and for the
/// free space the ray traversed.
#[derive(Clone, Copy, Debug)]
pub struct SensorModel {
    pub p_hit: f64,
    pub p_miss: f64,
}

impl Default for SensorModel {
    fn default() -> SensorModel {
        SensorModel { p_hit: 0.7, p_miss: 0.4 }
    }
}

impl SensorModel {
    pub fn validate(&self) {
        assert!(self.p_hit > 0.5 && self.p_hit < 1.0, "p_hit must lie in (0.5, 1)");
        assert!(self.p_miss > 0.0 && self.p_miss < 0.5, "p_miss must lie in (0, 0.5)");
    }
}

/// Odometry-uncertainty model. The attenuation factor applied to stored
/// log-odds is gamma = exp(-lambda * sigma^2), which stays in (0, 1] and so
/// always shrinks beliefs toward the 0.5 prior.
#[derive(Clone, Copy, Debug)]
pub struct MotionErrorModel {
    /// Odometry standard deviation in meters.
    pub sigma: f64,
    /// Attenuation rate in 1/m^2.
    pub lambda: f64,
}

impl Default for MotionErrorModel {
    fn default() -> MotionErrorModel {
        MotionErrorModel { sigma: 0.0, lambda: 0.5 }
    }
}

impl MotionErrorModel {
    pub fn gamma(&self) -> f64 {
        (-self.lambda * self.sigma * self.sigma).exp()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Leaf {
    pub log_odds: f64,
    pub label: SemanticLabel,
    label_counts: [u32; 5],
}

impl Leaf {
    fn new() -> Leaf {
        Leaf { log_odds: 0.0, label: SemanticLabel::Unlabeled, label_counts: [0; 5] }
    }

    pub fn probability(&self) -> f64 {
        inv_logit(self.log_odds)
    }

    /// Majority vote over observed labels; the most recent writer wins ties.
    fn record_label(&mut self, label: SemanticLabel) {
        self.label_counts[label.code() as usize] += 1;
        if self.label_counts[label.code() as usize] >= self.label_counts[self.label.code() as usize]
        {
            self.label = label;
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrateStats {
    /// Returns discarded because they fell outside the root region.
    pub dropped_returns: usize,
}

/// Sparse log-odds occupancy map over a fixed cubic region centered on the
/// robot. Voxel `i` has its center at `region_center + i * leaf_size`.
#[derive(Clone, Debug)]
pub struct OccupancyOctree {
    region_center: Point3,
    half_width: f64,
    leaf_size: f64,
    leaves: HashMap<VoxelIndex, Leaf>,
}

impl OccupancyOctree {
    pub fn new(region_center: Point3, half_width: f64, leaf_size: f64) -> OccupancyOctree {
        assert!(leaf_size > 0.0, "leaf size must be positive");
        assert!(half_width > 0.0, "half width must be positive");
        OccupancyOctree { region_center, half_width, leaf_size, leaves: HashMap::new() }
    }

    pub fn with_defaults() -> OccupancyOctree {
        OccupancyOctree::new([0.0; 3], 50.0, 0.25)
    }

    pub fn leaf_size(&self) -> f64 {
        self.leaf_size
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn region_center(&self) -> Point3 {
        self.region_center
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn leaf(&self, index: VoxelIndex) -> Option<&Leaf> {
        self.leaves.get(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VoxelIndex, &Leaf)> {
        self.leaves.iter()
    }

    pub fn voxel_index(&self, p: Point3) -> VoxelIndex {
        [
            ((p[0] - self.region_center[0]) / self.leaf_size).round() as i32,
            ((p[1] - self.region_center[1]) / self.leaf_size).round() as i32,
            ((p[2] - self.region_center[2]) / self.leaf_size).round() as i32,
        ]
    }

    pub fn voxel_center(&self, index: VoxelIndex) -> Point3 {
        [
            self.region_center[0] + index[0] as f64 * self.leaf_size,
            self.region_center[1] + index[1] as f64 * self.leaf_size,
            self.region_center[2] + index[2] as f64 * self.leaf_size,
        ]
    }

    pub fn in_region(&self, index: VoxelIndex) -> bool {
        index
            .iter()
            .all(|i| (*i as f64 * self.leaf_size).abs() <= self.half_width)
    }

    fn accumulate(&mut self, index: VoxelIndex, delta: f64) -> &mut Leaf {
        let leaf = self.leaves.entry(index).or_insert_with(Leaf::new);
        leaf.log_odds = (leaf.log_odds + delta).clamp(-LOG_ODDS_CLAMP, LOG_ODDS_CLAMP);
        leaf
    }

    pub(super) fn insert_raw(&mut self, index: VoxelIndex) -> &mut Leaf {
        self.leaves.entry(index).or_insert_with(Leaf::new)
    }

    /// Accumulate one scan: each return adds hit evidence to its end voxel
    /// (and records the point label); voxels traversed by the ray toward it
    /// collect miss evidence. Returns outside the root region are dropped
    /// and counted.
    pub fn integrate_scan(
        &mut self,
        cloud: &SemanticPointCloud,
        pose: &Pose,
        sensor: &SensorModel,
    ) -> IntegrateStats {
        sensor.validate();
        let mut stats = IntegrateStats::default();
        let l_hit = logit(sensor.p_hit);
        let l_miss = logit(sensor.p_miss);
        let origin = self.voxel_index([pose.translation.x, pose.translation.y, pose.translation.z]);
        for (p, label) in cloud.iter() {
            let end = self.voxel_index(pose.apply(*p));
            if !self.in_region(end) {
                stats.dropped_returns += 1;
                continue;
            }
            let path = line_voxels(origin, end);
            for voxel in &path[..path.len() - 1] {
                if self.in_region(*voxel) {
                    self.accumulate(*voxel, l_miss);
                }
            }
            self.accumulate(end, l_hit).record_label(label);
        }
        stats
    }

    /// Shrink every stored belief toward the prior: L <- L * gamma(sigma),
    /// then prune leaves that became indistinguishable from the prior.
    /// sigma = 0 leaves the tree untouched.
    pub fn motion_update(&mut self, motion: &MotionErrorModel) {
        if motion.sigma == 0.0 {
            return;
        }
        let gamma = motion.gamma();
        for leaf in self.leaves.values_mut() {
            leaf.log_odds *= gamma;
        }
        self.leaves.retain(|_, leaf| leaf.log_odds.abs() >= PRUNE_EPSILON);
    }

    /// Rebuild the map in a new robot frame: every leaf center moves through
    /// `relative_pose^{-1}` and lands on its nearest voxel; colliding voxels
    /// keep the strongest (max |log-odds|) entry; leaves leaving the region
    /// are dropped. Finishes with a motion update.
    pub fn recenter(&mut self, relative_pose: &Pose, motion: &MotionErrorModel) {
        let inv = relative_pose.inverse();
        let mut moved: HashMap<VoxelIndex, Leaf> = HashMap::with_capacity(self.leaves.len());
        for (index, leaf) in self.leaves.drain() {
            let center = [
                self.region_center[0] + index[0] as f64 * self.leaf_size,
                self.region_center[1] + index[1] as f64 * self.leaf_size,
                self.region_center[2] + index[2] as f64 * self.leaf_size,
            ];
            let p = inv.apply(center);
            let new_index = [
                ((p[0] - self.region_center[0]) / self.leaf_size).round() as i32,
                ((p[1] - self.region_center[1]) / self.leaf_size).round() as i32,
                ((p[2] - self.region_center[2]) / self.leaf_size).round() as i32,
            ];
            if !new_index
                .iter()
                .all(|i| (*i as f64 * self.leaf_size).abs() <= self.half_width)
            {
                continue;
            }
            match moved.entry(new_index) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(leaf);
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    if leaf.log_odds.abs() > e.get().log_odds.abs() {
                        e.insert(leaf);
                    }
                }
            }
        }
        self.leaves = moved;
        self.motion_update(motion);
    }

    /// One point per occupied leaf (P strictly above `threshold`) whose
    /// center lies within `radius` of the region center, ordered by voxel
    /// index.
    pub fn extract_local_map(&self, threshold: f64, radius: f64) -> SemanticPointCloud {
        assert!((0.5..1.0).contains(&threshold), "threshold must lie in [0.5, 1)");
        let mut picked: Vec<(VoxelIndex, SemanticLabel)> = Vec::new();
        let r2 = radius * radius;
        for (index, leaf) in &self.leaves {
            if leaf.probability() <= threshold {
                continue;
            }
            let d2: f64 = index
                .iter()
                .map(|i| (*i as f64 * self.leaf_size).powi(2))
                .sum();
            if d2 <= r2 {
                picked.push((*index, leaf.label));
            }
        }
        picked.sort_unstable_by_key(|(i, _)| *i);
        let mut cloud = SemanticPointCloud::default();
        for (index, label) in picked {
            cloud.push(self.voxel_center(index), label);
        }
        cloud
    }
}

/// Snap a cloud onto the voxel grid: one point per occupied voxel at its
/// center, labels fused by majority with last-writer tie-break, output
/// ordered by voxel index.
pub fn voxel_downsample(cloud: &SemanticPointCloud, leaf_size: f64) -> SemanticPointCloud {
    assert!(leaf_size > 0.0);
    let mut cells: std::collections::BTreeMap<VoxelIndex, ([u32; 5], SemanticLabel)> =
        std::collections::BTreeMap::new();
    for (p, label) in cloud.iter() {
        let index = [
            (p[0] / leaf_size).round() as i32,
            (p[1] / leaf_size).round() as i32,
            (p[2] / leaf_size).round() as i32,
        ];
        let entry = cells.entry(index).or_insert(([0; 5], label));
        entry.0[label.code() as usize] += 1;
        if entry.0[label.code() as usize] >= entry.0[entry.1.code() as usize] {
            entry.1 = label;
        }
    }
    let mut out = SemanticPointCloud::default();
    for (index, (_, label)) in cells {
        out.push(
            [
                index[0] as f64 * leaf_size,
                index[1] as f64 * leaf_size,
                index[2] as f64 * leaf_size,
            ],
            label,
        );
    }
    out
}
