//! Tuple mining and divergence metric learning.
//!
//! Training tuples pair an anchor stack with its rotated copies, nearby
//! positives, and far negatives. The loss couples a rotation-robust hinge,
//! a lazy triplet hinge, and a cross-branch divergence regularizer; the
//! optimizer is plain SGD with momentum.

mod gradcheck;
mod loss;
mod sgd;
mod tuple;

pub use gradcheck::{grad_check, GradCheckReport, GroupCheck};
pub use loss::{
    divergence_loss, divergence_loss_from_descriptors, lazy_rot_loss, lazy_trip_loss,
    viewpoint_free_loss, LossConfig, LossReport, TupleDescriptors, TupleGrads,
};
pub use sgd::{train, EpochStats, TrainLog, TrainOptions};
pub use tuple::{embed_tuple, mine_tuple, MiningConfig, PlaceEntry, TrainingSet, TrainingTuple};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("anchor {anchor} has no positives within {radius} m")]
    NoPositives { anchor: u64, radius: f64 },
    #[error("anchor {anchor} has no negatives beyond {radius} m")]
    NoNegatives { anchor: u64, radius: f64 },
    #[error("candidate set is empty")]
    EmptySet,
    #[error("training diverged at epoch {epoch}: total loss {total}")]
    Diverged { epoch: usize, total: f64 },
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
    #[error(transparent)]
    Sphere(#[from] crate::sphere::SphereError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
