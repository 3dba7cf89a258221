//! Training tuples: anchor, rotated set, positives, negatives.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::embed::{embed_place, ModelParams, PlaceDescriptor};
use crate::scene::{Point3, Pose, SemanticPointCloud};
use crate::sphere::{project_stack, SphericalStack};

use super::TrainError;

/// Number of rotated anchor copies in a tuple (30 degree steps).
pub const ROTATION_COUNT: usize = 12;

#[derive(Clone, Debug)]
pub struct PlaceEntry {
    pub id: u64,
    pub position: Point3,
    pub local_map: SemanticPointCloud,
}

/// A mineable dataset: one local map per place with its ground-truth
/// position.
#[derive(Clone, Debug, Default)]
pub struct TrainingSet {
    pub entries: Vec<PlaceEntry>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MiningConfig {
    /// Positive radius in meters.
    pub r_pos: f64,
    /// Negative radius in meters.
    pub r_neg: f64,
    /// Positives kept per tuple (nearest first).
    pub n_pos: usize,
    /// Negatives sampled uniformly per tuple.
    pub n_neg: usize,
    /// Projection resolution.
    pub n: usize,
    /// Normal-estimation neighbor count.
    pub k_neighbors: usize,
}

impl Default for MiningConfig {
    fn default() -> MiningConfig {
        MiningConfig { r_pos: 8.0, r_neg: 50.0, n_pos: 2, n_neg: 10, n: 32, k_neighbors: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct TrainingTuple {
    pub anchor_id: u64,
    pub anchor_position: Point3,
    pub anchor: SphericalStack,
    /// The anchor map re-projected after z-rotations of 0, 30, ..., 330
    /// degrees.
    pub rotations: Vec<SphericalStack>,
    pub positives: Vec<SphericalStack>,
    pub negatives: Vec<SphericalStack>,
}

/// Mine one tuple around `anchor_idx`: positives are the nearest places
/// within `r_pos` (anchor excluded), negatives a uniform sample beyond
/// `r_neg`, and the rotated set re-projects the anchor map at 30 degree
/// steps.
pub fn mine_tuple(
    dataset: &TrainingSet,
    anchor_idx: usize,
    mining: &MiningConfig,
    rng: &mut impl Rng,
) -> Result<TrainingTuple, TrainError> {
    let anchor = &dataset.entries[anchor_idx];

    let mut pos_candidates: Vec<(f64, usize)> = Vec::new();
    let mut neg_candidates: Vec<usize> = Vec::new();
    for (idx, entry) in dataset.entries.iter().enumerate() {
        if idx == anchor_idx {
            continue;
        }
        let d = dist(entry.position, anchor.position);
        if d <= mining.r_pos {
            pos_candidates.push((d, idx));
        } else if d >= mining.r_neg {
            neg_candidates.push(idx);
        }
    }
    if pos_candidates.is_empty() {
        return Err(TrainError::NoPositives { anchor: anchor.id, radius: mining.r_pos });
    }
    if neg_candidates.is_empty() {
        return Err(TrainError::NoNegatives { anchor: anchor.id, radius: mining.r_neg });
    }
    pos_candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    pos_candidates.truncate(mining.n_pos.max(1));
    neg_candidates.shuffle(rng);
    neg_candidates.truncate(mining.n_neg.max(1));

    let project = |map: &SemanticPointCloud| -> Result<SphericalStack, TrainError> {
        Ok(project_stack(map, mining.n, mining.k_neighbors)?.0)
    };

    let anchor_stack = project(&anchor.local_map)?;
    let mut rotations = Vec::with_capacity(ROTATION_COUNT);
    for r in 0..ROTATION_COUNT {
        let angle = std::f64::consts::TAU * r as f64 / ROTATION_COUNT as f64;
        let rotated = anchor.local_map.transformed(&Pose::from_yaw(angle));
        rotations.push(project(&rotated)?);
    }
    let positives = pos_candidates
        .iter()
        .map(|(_, idx)| project(&dataset.entries[*idx].local_map))
        .collect::<Result<_, _>>()?;
    let negatives = neg_candidates
        .iter()
        .map(|idx| project(&dataset.entries[*idx].local_map))
        .collect::<Result<_, _>>()?;

    Ok(TrainingTuple {
        anchor_id: anchor.id,
        anchor_position: anchor.position,
        anchor: anchor_stack,
        rotations,
        positives,
        negatives,
    })
}

/// Descriptors for every member of a tuple, preserving set structure.
#[derive(Clone, Debug)]
pub struct TupleStacksView<'a> {
    pub anchor: &'a SphericalStack,
    pub rotations: Vec<&'a SphericalStack>,
    pub positives: Vec<&'a SphericalStack>,
    pub negatives: Vec<&'a SphericalStack>,
}

/// Embed every tuple member. `rotation_subset` restricts which rotated
/// copies are embedded (training subsamples them; evaluation uses all 12).
pub fn embed_tuple(
    tuple: &TrainingTuple,
    model: &ModelParams,
    rotation_subset: Option<&[usize]>,
) -> Result<super::TupleDescriptors, TrainError> {
    let rotations: Vec<PlaceDescriptor> = match rotation_subset {
        Some(idxs) => idxs
            .iter()
            .map(|i| embed_place(&tuple.rotations[*i], model))
            .collect::<Result<_, _>>()?,
        None => tuple
            .rotations
            .iter()
            .map(|s| embed_place(s, model))
            .collect::<Result<_, _>>()?,
    };
    Ok(super::TupleDescriptors {
        anchor: embed_place(&tuple.anchor, model)?,
        rotations,
        positives: tuple
            .positives
            .iter()
            .map(|s| embed_place(s, model))
            .collect::<Result<_, _>>()?,
        negatives: tuple
            .negatives
            .iter()
            .map(|s| embed_place(s, model))
            .collect::<Result<_, _>>()?,
    })
}

pub(super) fn dist(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Synthetic fixture shared by the unit tests and the gradient checker: a
/// line of places with distinctive static geometry.
pub fn synthetic_training_set(places: usize, spacing: f64, seed: u64) -> TrainingSet {
    let scenario = crate::scene::synth_scenario(&crate::scene::ScenarioSpec {
        seed,
        n_places: places,
        place_spacing: spacing,
        buildings_per_place: 2,
        poles_per_place: 2,
        dynamics_per_place: 1,
        points_per_object: 80,
        sensor_height: 1.5,
    })
    .expect("valid fixture spec");
    let entries = scenario
        .frames
        .iter()
        .enumerate()
        .map(|(idx, (cloud, pose))| PlaceEntry {
            id: idx as u64,
            position: [pose.translation.x, pose.translation.y, pose.translation.z],
            local_map: cloud.clone(),
        })
        .collect();
    TrainingSet { entries }
}
