//! Central-finite-difference validation of the training gradients.
//!
//! Hinge losses and rectifiers are only piecewise smooth, so coordinates
//! whose perturbation flips any activation (relu sign, hinge winner, active
//! set) are skipped and counted instead of compared.

use crate::embed::{backward, forward_traced, ModelConfig, ModelParams, ParamLayout};

use super::loss::{divergence_loss_from_descriptors, LossConfig, TupleDescriptors};
use super::tuple::TrainingTuple;
use super::TrainError;

#[derive(Clone, Debug)]
pub struct GroupCheck {
    pub name: String,
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub groups: Vec<GroupCheck>,
    pub step: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }

    pub fn total_skipped(&self) -> usize {
        self.groups.iter().map(|g| g.skipped_kinks).sum()
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error() < tolerance
    }
}

/// Loss value plus an activation fingerprint (relu masks and hinge
/// winners); coordinates whose fingerprint changes across the step sit on
/// a kink.
fn loss_with_signature(
    tuple: &TrainingTuple,
    model: &ModelParams,
    cfg: &LossConfig,
    rotation_pick: &[usize],
) -> Result<(f64, u64), TrainError> {
    let mut sig = 0xcbf2_9ce4_8422_2325u64; // FNV offset basis
    let mut feed = |byte: u8| {
        sig ^= byte as u64;
        sig = sig.wrapping_mul(0x0000_0100_0000_01b3);
    };

    let mut descriptors = Vec::new();
    let mut stacks: Vec<&crate::sphere::SphericalStack> = vec![&tuple.anchor];
    stacks.extend(rotation_pick.iter().map(|r| &tuple.rotations[*r]));
    stacks.extend(tuple.positives.iter());
    stacks.extend(tuple.negatives.iter());
    for stack in stacks {
        let trace = forward_traced(stack, model)?;
        for branch in &trace.branches {
            for layer in &branch.layers {
                for grid in &layer.preact {
                    let mut bits = 0u8;
                    let mut nbits = 0;
                    for v in grid.data() {
                        bits = (bits << 1) | u8::from(*v > 0.0);
                        nbits += 1;
                        if nbits == 8 {
                            feed(bits);
                            bits = 0;
                            nbits = 0;
                        }
                    }
                    feed(bits);
                }
            }
        }
        descriptors.push(trace.descriptor);
    }

    let n_rot = rotation_pick.len();
    let n_pos = tuple.positives.len();
    let desc = TupleDescriptors {
        anchor: descriptors[0].clone(),
        rotations: descriptors[1..1 + n_rot].to_vec(),
        positives: descriptors[1 + n_rot..1 + n_rot + n_pos].to_vec(),
        negatives: descriptors[1 + n_rot + n_pos..].to_vec(),
    };
    let (report, grads) = divergence_loss_from_descriptors(&desc, cfg)?;

    // Winners and active sets enter the fingerprint through the gradient
    // sparsity pattern.
    for member in grads.members() {
        for v in member {
            feed(u8::from(*v != 0.0));
        }
    }
    for l in 0..3 {
        feed(report.active_rot[l] as u8);
        feed(report.active_trip[l] as u8);
    }
    feed(report.active_div as u8);

    Ok((report.total, sig))
}

/// Compare analytic training gradients against central finite differences
/// for every parameter group. Uses the full 12-rotation tuple.
pub fn grad_check(
    model: &ModelParams,
    tuple: &TrainingTuple,
    cfg: &LossConfig,
    step: f64,
) -> Result<GradCheckReport, TrainError> {
    let config: &ModelConfig = &model.config;
    let rotation_pick: Vec<usize> = (0..tuple.rotations.len()).collect();

    // Analytic gradients.
    let mut analytic = vec![0.0; model.layout().total];
    {
        let mut traces = vec![forward_traced(&tuple.anchor, model)?];
        for r in &rotation_pick {
            traces.push(forward_traced(&tuple.rotations[*r], model)?);
        }
        for s in &tuple.positives {
            traces.push(forward_traced(s, model)?);
        }
        for s in &tuple.negatives {
            traces.push(forward_traced(s, model)?);
        }
        let n_rot = rotation_pick.len();
        let n_pos = tuple.positives.len();
        let desc = TupleDescriptors {
            anchor: traces[0].descriptor.clone(),
            rotations: traces[1..1 + n_rot].iter().map(|t| t.descriptor.clone()).collect(),
            positives: traces[1 + n_rot..1 + n_rot + n_pos]
                .iter()
                .map(|t| t.descriptor.clone())
                .collect(),
            negatives: traces[1 + n_rot + n_pos..]
                .iter()
                .map(|t| t.descriptor.clone())
                .collect(),
        };
        let (_, grads) = divergence_loss_from_descriptors(&desc, cfg)?;
        for (trace, upstream) in traces.iter().zip(grads.members()) {
            if upstream.iter().all(|g| *g == 0.0) {
                continue;
            }
            for (a, g) in analytic.iter_mut().zip(backward(trace, model, upstream)) {
                *a += g;
            }
        }
    }

    let flat = model.to_flat();
    let layout = ParamLayout::new(config);
    let mut groups = Vec::new();
    for (name, range, _) in &layout.groups {
        let mut check = GroupCheck {
            name: name.clone(),
            checked: 0,
            skipped_kinks: 0,
            max_rel_error: 0.0,
        };
        for idx in range.clone() {
            let mut plus = flat.clone();
            plus[idx] += step;
            let mut minus = flat.clone();
            minus[idx] -= step;
            let model_p = ModelParams::from_flat(config, model.seed, &plus)?;
            let model_m = ModelParams::from_flat(config, model.seed, &minus)?;
            let (fp, sig_p) = loss_with_signature(tuple, &model_p, cfg, &rotation_pick)?;
            let (fm, sig_m) = loss_with_signature(tuple, &model_m, cfg, &rotation_pick)?;
            if sig_p != sig_m {
                check.skipped_kinks += 1;
                continue;
            }
            let numeric = (fp - fm) / (2.0 * step);
            // Floor keeps central-difference cancellation noise from
            // dominating near-zero gradients.
            let denom = numeric.abs().max(analytic[idx].abs()).max(1e-6);
            let rel = (numeric - analytic[idx]).abs() / denom;
            check.checked += 1;
            if rel > check.max_rel_error {
                check.max_rel_error = rel;
            }
        }
        groups.push(check);
    }
    Ok(GradCheckReport { groups, step })
}
