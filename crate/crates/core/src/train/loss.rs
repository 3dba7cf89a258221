//! The viewpoint-free divergence loss.
//!
//! All distances are squared Euclidean. Hinges are "lazy": each loss takes
//! the hardest violating candidate. The per-attribute terms act on the
//! branch slices of the fused descriptor; the regularizer pushes
//! re-normalized anchor branch slices apart.

use serde::{Deserialize, Serialize};

use crate::embed::{ModelParams, PlaceDescriptor};

use super::tuple::TrainingTuple;
use super::TrainError;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LossConfig {
    /// LazyRot margin (the paper's l).
    pub margin_rot: f64,
    /// LazyTrip margin (alpha).
    pub margin_trip: f64,
    /// Divergence regularizer weight (lambda).
    pub lambda: f64,
    /// Divergence margin (m).
    pub margin_div: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Rotations sampled per training step (all 12 are used elsewhere).
    pub rotations_per_step: usize,
    /// Tuples mined per epoch; 0 walks every anchor.
    pub tuples_per_epoch: usize,
    pub seed: u64,
}

impl Default for LossConfig {
    fn default() -> LossConfig {
        LossConfig {
            margin_rot: 0.5,
            margin_trip: 0.5,
            lambda: 0.1,
            margin_div: 0.5,
            learning_rate: 1e-2,
            momentum: 0.9,
            epochs: 30,
            batch_size: 2,
            rotations_per_step: 4,
            tuples_per_epoch: 8,
            seed: 7,
        }
    }
}

/// Per-term loss values and active-constraint counts.
#[derive(Clone, Debug, Default)]
pub struct LossReport {
    pub lazy_rot: [f64; 3],
    pub lazy_trip: [f64; 3],
    pub viewpoint_free: [f64; 3],
    pub regularizer: f64,
    pub total: f64,
    /// Hinge candidates with positive margin violation, per attribute.
    pub active_rot: [usize; 3],
    pub active_trip: [usize; 3],
    /// Active divergence pairs (of the 3 unordered branch pairs).
    pub active_div: usize,
}

/// Descriptors of every tuple member.
#[derive(Clone, Debug)]
pub struct TupleDescriptors {
    pub anchor: PlaceDescriptor,
    pub rotations: Vec<PlaceDescriptor>,
    pub positives: Vec<PlaceDescriptor>,
    pub negatives: Vec<PlaceDescriptor>,
}

/// Upstream gradients (dTotal/dDescriptor) per tuple member, aligned with
/// [`TupleDescriptors`].
#[derive(Clone, Debug)]
pub struct TupleGrads {
    pub anchor: Vec<f64>,
    pub rotations: Vec<Vec<f64>>,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
}

impl TupleGrads {
    fn zeros(desc: &TupleDescriptors) -> TupleGrads {
        let dim = desc.anchor.dim();
        TupleGrads {
            anchor: vec![0.0; dim],
            rotations: vec![vec![0.0; dim]; desc.rotations.len()],
            positives: vec![vec![0.0; dim]; desc.positives.len()],
            negatives: vec![vec![0.0; dim]; desc.negatives.len()],
        }
    }

    pub fn members(&self) -> impl Iterator<Item = &Vec<f64>> {
        std::iter::once(&self.anchor)
            .chain(self.rotations.iter())
            .chain(self.positives.iter())
            .chain(self.negatives.iter())
    }
}

pub struct LazyOutcome {
    pub value: f64,
    /// Candidates violating the margin (hinge > 0).
    pub active: usize,
    /// Indices of the winning candidate when the hinge is positive.
    pub winner: Option<(usize, usize, usize)>,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// max over (i, j, k) of [margin + d(rot_j, pos_i) - d(rot_j, neg_k)]_+.
pub fn lazy_rot_loss(
    rotations: &[&[f64]],
    positives: &[&[f64]],
    negatives: &[&[f64]],
    margin: f64,
) -> Result<LazyOutcome, TrainError> {
    if rotations.is_empty() || positives.is_empty() || negatives.is_empty() {
        return Err(TrainError::EmptySet);
    }
    let mut best = 0.0f64;
    let mut winner = None;
    let mut active = 0usize;
    for (j, rot) in rotations.iter().enumerate() {
        for (i, pos) in positives.iter().enumerate() {
            let d_pos = dist_sq(rot, pos);
            for (k, neg) in negatives.iter().enumerate() {
                let hinge = margin + d_pos - dist_sq(rot, neg);
                if hinge > 0.0 {
                    active += 1;
                    if hinge > best {
                        best = hinge;
                        winner = Some((i, j, k));
                    }
                }
            }
        }
    }
    Ok(LazyOutcome { value: best, active, winner })
}

/// max over j of [margin + min_i d(anchor, pos_i) - d(anchor, neg_j)]_+.
pub fn lazy_trip_loss(
    anchor: &[f64],
    positives: &[&[f64]],
    negatives: &[&[f64]],
    margin: f64,
) -> Result<LazyOutcome, TrainError> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(TrainError::EmptySet);
    }
    let (pos_idx, d_pos) = positives
        .iter()
        .map(|p| dist_sq(anchor, p))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut best = 0.0f64;
    let mut winner = None;
    let mut active = 0usize;
    for (j, neg) in negatives.iter().enumerate() {
        let hinge = margin + d_pos - dist_sq(anchor, neg);
        if hinge > 0.0 {
            active += 1;
            if hinge > best {
                best = hinge;
                winner = Some((pos_idx, j, 0));
            }
        }
    }
    Ok(LazyOutcome { value: best, active, winner })
}

/// L_free for one attribute: LazyRot + LazyTrip on that branch slice.
pub fn viewpoint_free_loss(
    anchor: &[f64],
    rotations: &[&[f64]],
    positives: &[&[f64]],
    negatives: &[&[f64]],
    cfg: &LossConfig,
) -> Result<f64, TrainError> {
    let rot = lazy_rot_loss(rotations, positives, negatives, cfg.margin_rot)?;
    let trip = lazy_trip_loss(anchor, positives, negatives, cfg.margin_trip)?;
    Ok(rot.value + trip.value)
}

/// Full loss of one tuple given member descriptors, with the upstream
/// gradient of every member.
pub fn divergence_loss_from_descriptors(
    desc: &TupleDescriptors,
    cfg: &LossConfig,
) -> Result<(LossReport, TupleGrads), TrainError> {
    let dim = desc.anchor.dim() / 3;
    let mut report = LossReport::default();
    let mut grads = TupleGrads::zeros(desc);

    let slices = |d: &PlaceDescriptor, l: usize| -> Vec<f64> { d.branch_slice(l).to_vec() };

    for l in 0..3usize {
        let anchor_s = slices(&desc.anchor, l);
        let rot_s: Vec<Vec<f64>> = desc.rotations.iter().map(|d| slices(d, l)).collect();
        let pos_s: Vec<Vec<f64>> = desc.positives.iter().map(|d| slices(d, l)).collect();
        let neg_s: Vec<Vec<f64>> = desc.negatives.iter().map(|d| slices(d, l)).collect();
        let rot_refs: Vec<&[f64]> = rot_s.iter().map(Vec::as_slice).collect();
        let pos_refs: Vec<&[f64]> = pos_s.iter().map(Vec::as_slice).collect();
        let neg_refs: Vec<&[f64]> = neg_s.iter().map(Vec::as_slice).collect();

        let rot = lazy_rot_loss(&rot_refs, &pos_refs, &neg_refs, cfg.margin_rot)?;
        report.lazy_rot[l] = rot.value;
        report.active_rot[l] = rot.active;
        if let Some((i, j, k)) = rot.winner {
            // d/d rot = 2(neg - pos); d/d pos = -2(rot - pos);
            // d/d neg = 2(rot - neg).
            let off = l * dim;
            for c in 0..dim {
                let (r, p, ng) = (rot_s[j][c], pos_s[i][c], neg_s[k][c]);
                grads.rotations[j][off + c] += 2.0 * (ng - p);
                grads.positives[i][off + c] += -2.0 * (r - p);
                grads.negatives[k][off + c] += 2.0 * (r - ng);
            }
        }

        let trip = lazy_trip_loss(&anchor_s, &pos_refs, &neg_refs, cfg.margin_trip)?;
        report.lazy_trip[l] = trip.value;
        report.active_trip[l] = trip.active;
        if let Some((i, j, _)) = trip.winner {
            let off = l * dim;
            for c in 0..dim {
                let (a, p, ng) = (anchor_s[c], pos_s[i][c], neg_s[j][c]);
                grads.anchor[off + c] += 2.0 * (ng - p);
                grads.positives[i][off + c] += -2.0 * (a - p);
                grads.negatives[j][off + c] += 2.0 * (a - ng);
            }
        }

        report.viewpoint_free[l] = rot.value + trip.value;
    }

    // Divergence regularizer over the anchor's branch pairs, each slice
    // re-normalized before distancing.
    let mut normed = Vec::with_capacity(3);
    for l in 0..3usize {
        let s = desc.anchor.branch_slice(l);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let z: Vec<f64> = if norm > 0.0 { s.iter().map(|v| v / norm).collect() } else { vec![0.0; dim] };
        normed.push((z, norm));
    }
    for a in 0..3usize {
        for b in (a + 1)..3 {
            let d2 = dist_sq(&normed[a].0, &normed[b].0);
            let hinge = cfg.margin_div - d2;
            if hinge > 0.0 {
                report.regularizer += hinge;
                report.active_div += 1;
                // d(total)/d z_a = -lambda * 2 (z_a - z_b), then back through
                // the slice normalization.
                for (slot, other) in [(a, b), (b, a)] {
                    let (z, norm) = &normed[slot];
                    if *norm == 0.0 {
                        continue;
                    }
                    let zo = &normed[other].0;
                    let dz: Vec<f64> = z
                        .iter()
                        .zip(zo.iter())
                        .map(|(x, y)| -2.0 * cfg.lambda * (x - y))
                        .collect();
                    let dot: f64 = z.iter().zip(dz.iter()).map(|(x, y)| x * y).sum();
                    let off = slot * dim;
                    for c in 0..dim {
                        grads.anchor[off + c] += (dz[c] - z[c] * dot) / norm;
                    }
                }
            }
        }
    }

    report.total = report.viewpoint_free.iter().sum::<f64>() + cfg.lambda * report.regularizer;
    Ok((report, grads))
}

/// Embed a whole tuple (all 12 rotations) and evaluate the loss.
pub fn divergence_loss(
    tuple: &TrainingTuple,
    model: &ModelParams,
    cfg: &LossConfig,
) -> Result<LossReport, TrainError> {
    let desc = super::tuple::embed_tuple(tuple, model, None)?;
    Ok(divergence_loss_from_descriptors(&desc, cfg)?.0)
}
