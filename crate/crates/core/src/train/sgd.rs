//! SGD-with-momentum training over mined tuples.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embed::{backward, forward_traced, save_checkpoint, ModelConfig, ModelParams};

use super::loss::{divergence_loss_from_descriptors, LossConfig, TupleDescriptors};
use super::tuple::{MiningConfig, TrainingSet, TrainingTuple, ROTATION_COUNT};
use super::TrainError;

#[derive(Clone, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_total: f64,
    pub mean_lazy_rot: f64,
    pub mean_lazy_trip: f64,
    pub mean_regularizer: f64,
    pub active_rot: usize,
    pub active_trip: usize,
    pub active_div: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epoch,mean_total,mean_lazy_rot,mean_lazy_trip,mean_regularizer,active_rot,active_trip,active_div,wall_seconds\n",
        );
        for e in &self.epochs {
            out += &format!(
                "{},{},{},{},{},{},{},{},{}\n",
                e.epoch,
                e.mean_total,
                e.mean_lazy_rot,
                e.mean_lazy_trip,
                e.mean_regularizer,
                e.active_rot,
                e.active_trip,
                e.active_div,
                e.wall_seconds
            );
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    /// Directory receiving per-epoch checkpoints and the final model.
    pub checkpoint_dir: Option<PathBuf>,
}

/// Train a fresh model on the dataset. Deterministic for a fixed seed
/// (single worker). Checkpoints are written per epoch when a directory is
/// given; divergence aborts with the last finite epoch preserved on disk.
pub fn train(
    dataset: &TrainingSet,
    model_cfg: &ModelConfig,
    loss_cfg: &LossConfig,
    mining: &MiningConfig,
    options: &TrainOptions,
) -> Result<(ModelParams, TrainLog), TrainError> {
    let model = ModelParams::init(model_cfg, loss_cfg.seed)?;
    let mut flat = model.to_flat();
    let mut velocity = vec![0.0; flat.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(loss_cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut log = TrainLog::default();
    let mut cache = StackCache::default();

    let anchors_all: Vec<usize> = (0..dataset.len())
        .filter(|idx| has_candidates(dataset, *idx, mining))
        .collect();
    if anchors_all.is_empty() {
        return Err(TrainError::EmptySet);
    }

    for epoch in 0..loss_cfg.epochs {
        let start = Instant::now();
        let mut order = anchors_all.clone();
        order.shuffle(&mut rng);
        if loss_cfg.tuples_per_epoch > 0 {
            order.truncate(loss_cfg.tuples_per_epoch);
        }

        let mut totals = (0.0, 0.0, 0.0, 0.0);
        let mut actives = (0usize, 0usize, 0usize);
        let mut seen = 0usize;

        for batch in order.chunks(loss_cfg.batch_size.max(1)) {
            let current = ModelParams::from_flat(model_cfg, loss_cfg.seed, &flat)?;
            let mut grad_acc = vec![0.0; flat.len()];
            let mut batch_count = 0usize;

            for &anchor_idx in batch {
                let tuple = cache.mine(dataset, anchor_idx, mining, &mut rng)?;
                let rotation_pick =
                    sample_rotations(loss_cfg.rotations_per_step, &mut rng);
                let (report, ok) = step_gradients(
                    &tuple,
                    &current,
                    loss_cfg,
                    &rotation_pick,
                    &mut grad_acc,
                )?;
                if !ok {
                    return Err(TrainError::Diverged { epoch, total: report.total });
                }
                totals.0 += report.total;
                totals.1 += report.lazy_rot.iter().sum::<f64>();
                totals.2 += report.lazy_trip.iter().sum::<f64>();
                totals.3 += report.regularizer;
                actives.0 += report.active_rot.iter().sum::<usize>();
                actives.1 += report.active_trip.iter().sum::<usize>();
                actives.2 += report.active_div;
                batch_count += 1;
                seen += 1;
            }

            let scale = 1.0 / batch_count.max(1) as f64;
            for ((p, v), g) in flat.iter_mut().zip(velocity.iter_mut()).zip(grad_acc.iter()) {
                *v = loss_cfg.momentum * *v - loss_cfg.learning_rate * g * scale;
                *p += *v;
            }
        }

        let denom = seen.max(1) as f64;
        let stats = EpochStats {
            epoch,
            mean_total: totals.0 / denom,
            mean_lazy_rot: totals.1 / denom,
            mean_lazy_trip: totals.2 / denom,
            mean_regularizer: totals.3 / denom,
            active_rot: actives.0,
            active_trip: actives.1,
            active_div: actives.2,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        if !stats.mean_total.is_finite() {
            return Err(TrainError::Diverged { epoch, total: stats.mean_total });
        }
        log.epochs.push(stats);

        if let Some(dir) = &options.checkpoint_dir {
            let snapshot = ModelParams::from_flat(model_cfg, loss_cfg.seed, &flat)?;
            save_checkpoint(&snapshot, dir, &format!("epoch_{epoch:04}"))?;
        }
    }

    let trained = ModelParams::from_flat(model_cfg, loss_cfg.seed, &flat)?;
    if let Some(dir) = &options.checkpoint_dir {
        save_checkpoint(&trained, dir, "final")?;
    }
    Ok((trained, log))
}

/// Projections are pure functions of (map, n, k), so stacks project once
/// and tuples assemble from cached pieces; only the negative sampling stays
/// stochastic per step. Semantics match [`super::tuple::mine_tuple`].
#[derive(Default)]
struct StackCache {
    entries: std::collections::HashMap<usize, crate::sphere::SphericalStack>,
    rotations: std::collections::HashMap<usize, Vec<crate::sphere::SphericalStack>>,
}

impl StackCache {
    fn entry_stack(
        &mut self,
        dataset: &TrainingSet,
        idx: usize,
        mining: &MiningConfig,
    ) -> Result<crate::sphere::SphericalStack, TrainError> {
        if let Some(s) = self.entries.get(&idx) {
            return Ok(s.clone());
        }
        let stack =
            crate::sphere::project_stack(&dataset.entries[idx].local_map, mining.n, mining.k_neighbors)?
                .0;
        self.entries.insert(idx, stack.clone());
        Ok(stack)
    }

    fn rotation_stacks(
        &mut self,
        dataset: &TrainingSet,
        idx: usize,
        mining: &MiningConfig,
    ) -> Result<Vec<crate::sphere::SphericalStack>, TrainError> {
        if let Some(s) = self.rotations.get(&idx) {
            return Ok(s.clone());
        }
        let map = &dataset.entries[idx].local_map;
        let mut stacks = Vec::with_capacity(ROTATION_COUNT);
        for r in 0..ROTATION_COUNT {
            let angle = std::f64::consts::TAU * r as f64 / ROTATION_COUNT as f64;
            let rotated = map.transformed(&crate::scene::Pose::from_yaw(angle));
            stacks.push(crate::sphere::project_stack(&rotated, mining.n, mining.k_neighbors)?.0);
        }
        self.rotations.insert(idx, stacks.clone());
        Ok(stacks)
    }

    fn mine(
        &mut self,
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
            let d = super::tuple::dist(entry.position, anchor.position);
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

        let positives = pos_candidates
            .iter()
            .map(|(_, idx)| self.entry_stack(dataset, *idx, mining))
            .collect::<Result<_, _>>()?;
        let negatives = neg_candidates
            .iter()
            .map(|idx| self.entry_stack(dataset, *idx, mining))
            .collect::<Result<_, _>>()?;
        Ok(TrainingTuple {
            anchor_id: anchor.id,
            anchor_position: anchor.position,
            anchor: self.entry_stack(dataset, anchor_idx, mining)?,
            rotations: self.rotation_stacks(dataset, anchor_idx, mining)?,
            positives,
            negatives,
        })
    }
}

fn has_candidates(dataset: &TrainingSet, anchor_idx: usize, mining: &MiningConfig) -> bool {
    let anchor = &dataset.entries[anchor_idx];
    let mut has_pos = false;
    let mut has_neg = false;
    for (idx, e) in dataset.entries.iter().enumerate() {
        if idx == anchor_idx {
            continue;
        }
        let d = super::tuple::dist(e.position, anchor.position);
        has_pos |= d <= mining.r_pos;
        has_neg |= d >= mining.r_neg;
        if has_pos && has_neg {
            return true;
        }
    }
    false
}

fn sample_rotations(count: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..ROTATION_COUNT).collect();
    all.shuffle(rng);
    all.truncate(count.clamp(1, ROTATION_COUNT));
    all.sort_unstable();
    all
}

/// Forward every member, compute the loss, and accumulate parameter
/// gradients. Returns the loss report and whether it was finite.
fn step_gradients(
    tuple: &TrainingTuple,
    model: &ModelParams,
    loss_cfg: &LossConfig,
    rotation_pick: &[usize],
    grad_acc: &mut [f64],
) -> Result<(super::LossReport, bool), TrainError> {
    let traces: Vec<_> = {
        let mut v = Vec::with_capacity(1 + rotation_pick.len() + tuple.positives.len() + tuple.negatives.len());
        v.push(forward_traced(&tuple.anchor, model)?);
        for r in rotation_pick {
            v.push(forward_traced(&tuple.rotations[*r], model)?);
        }
        for s in &tuple.positives {
            v.push(forward_traced(s, model)?);
        }
        for s in &tuple.negatives {
            v.push(forward_traced(s, model)?);
        }
        v
    };

    let n_rot = rotation_pick.len();
    let n_pos = tuple.positives.len();
    let descriptors = TupleDescriptors {
        anchor: traces[0].descriptor.clone(),
        rotations: traces[1..1 + n_rot].iter().map(|t| t.descriptor.clone()).collect(),
        positives: traces[1 + n_rot..1 + n_rot + n_pos]
            .iter()
            .map(|t| t.descriptor.clone())
            .collect(),
        negatives: traces[1 + n_rot + n_pos..].iter().map(|t| t.descriptor.clone()).collect(),
    };

    let (report, grads) = divergence_loss_from_descriptors(&descriptors, loss_cfg)?;
    if !report.total.is_finite() {
        return Ok((report, false));
    }

    for (trace, upstream) in traces.iter().zip(grads.members()) {
        if upstream.iter().all(|g| *g == 0.0) {
            continue;
        }
        let member_grads = backward(trace, model, upstream);
        for (acc, g) in grad_acc.iter_mut().zip(member_grads.iter()) {
            *acc += g;
        }
    }
    Ok((report, true))
}
