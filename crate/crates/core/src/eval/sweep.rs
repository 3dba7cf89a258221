//! Recall surfaces under controlled viewpoint offsets.
//!
//! For each (delta_t, delta_theta) cell the scenario's query frames are
//! regenerated with the sensor displaced laterally by delta_t and its
//! heading rotated by delta_theta, then embedded and retrieved against the
//! reference index.

use crate::dom::voxel_downsample;
use crate::embed::{embed_place, naive_descriptor, ModelParams};
use crate::scene::Scenario;
use crate::sphere::project_stack;

use super::index::DescriptorIndex;
use super::metrics::{recall_at, TopSpec};
use super::EvalError;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub delta_ts: Vec<f64>,
    /// Heading offsets in degrees.
    pub delta_thetas_deg: Vec<f64>,
    /// Projection resolution and neighbor count.
    pub n: usize,
    pub k_neighbors: usize,
    /// Voxel size used to snap query scans onto the map grid.
    pub leaf_size: f64,
    /// Retrieval success radius in meters.
    pub r_pos: f64,
    /// Retrieval depth.
    pub top: TopSpec,
    /// Embed with the flattened-stack baseline instead of the model.
    pub naive_baseline: bool,
    pub range_scale: f64,
}

#[derive(Clone, Debug)]
pub struct SweepSurface {
    /// (delta_t meters, delta_theta degrees, recall).
    pub cells: Vec<(f64, f64, f64)>,
}

impl SweepSurface {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_t_m,delta_theta_deg,recall\n");
        for (dt, dth, r) in &self.cells {
            out += &format!("{dt},{dth},{r}\n");
        }
        out
    }

    pub fn recall_for(&self, dt: f64, dth: f64) -> Option<f64> {
        self.cells
            .iter()
            .find(|(a, b, _)| (a - dt).abs() < 1e-9 && (b - dth).abs() < 1e-9)
            .map(|(_, _, r)| *r)
    }

    pub fn mean_recall(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().map(|(_, _, r)| r).sum::<f64>() / self.cells.len() as f64
    }
}

pub fn viewpoint_sweep(
    scenario: &Scenario,
    model: &ModelParams,
    index: &DescriptorIndex,
    cfg: &SweepConfig,
) -> Result<SweepSurface, EvalError> {
    let mut cells = Vec::with_capacity(cfg.delta_ts.len() * cfg.delta_thetas_deg.len());
    for &dt in &cfg.delta_ts {
        for &dth in &cfg.delta_thetas_deg {
            let yaw = dth.to_radians();
            let mut ranked = Vec::with_capacity(scenario.place_centers.len());
            let mut truth = Vec::with_capacity(scenario.place_centers.len());
            for center in &scenario.place_centers {
                // Lateral (+y) offset keeps the nearest place unambiguous.
                let pose = scenario.sensor_pose(*center, [0.0, dt], yaw);
                let scan = voxel_downsample(&scenario.scan_from(&pose), cfg.leaf_size);
                let (stack, _) = project_stack(&scan, cfg.n, cfg.k_neighbors)?;
                let desc = if cfg.naive_baseline {
                    naive_descriptor(&stack, cfg.range_scale)
                } else {
                    embed_place(&stack, model)?
                };
                let k = cfg.top.resolve(index.len()).min(index.len());
                let (hits, _) = index.query_knn(&desc.values, k)?;
                ranked.push(hits.into_iter().map(|(id, _)| id).collect::<Vec<u64>>());

                let query_pos = [pose.translation.x, pose.translation.y, pose.translation.z];
                truth.push(
                    index
                        .ids()
                        .iter()
                        .zip(index.positions().iter())
                        .filter(|(_, p)| {
                            let dx = p[0] - query_pos[0];
                            let dy = p[1] - query_pos[1];
                            let dz = p[2] - query_pos[2];
                            (dx * dx + dy * dy + dz * dz).sqrt() <= cfg.r_pos
                        })
                        .map(|(id, _)| *id)
                        .collect::<std::collections::HashSet<u64>>(),
                );
            }
            let recall = recall_at(&ranked, &truth, cfg.top, index.len())?;
            cells.push((dt, dth, recall));
        }
    }
    Ok(SweepSurface { cells })
}
