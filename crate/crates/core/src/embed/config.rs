use serde::{Deserialize, Serialize};

use super::EmbedError;

/// Architecture of one embedding branch (all three branches share it).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Spherical image resolution the model consumes.
    pub n: usize,
    /// Channel counts per stage; starts at the 2 projection channels.
    pub channels: Vec<usize>,
    /// Analysis bandwidth per conv layer, non-increasing.
    pub bandwidths: Vec<usize>,
    /// VLAD cluster count K.
    pub clusters: usize,
    /// Branch descriptor dimension; the fused descriptor is 3x this.
    pub branch_dim: usize,
    /// Distance channel divisor (meters mapping to ~[0, 1]).
    pub range_scale: f64,
}

impl ModelConfig {
    /// The small default architecture: 2 conv layers, channels 2->8->16,
    /// bandwidths n/2 -> n/4, 8 clusters, 64-dim branches.
    pub fn toy(n: usize) -> ModelConfig {
        ModelConfig {
            n,
            channels: vec![2, 8, 16],
            bandwidths: vec![n / 2, n / 4],
            clusters: 8,
            branch_dim: 64,
            range_scale: 50.0,
        }
    }

    /// Miniature config for gradient checking.
    pub fn tiny() -> ModelConfig {
        ModelConfig {
            n: 8,
            channels: vec![2, 3, 2],
            bandwidths: vec![4, 3],
            clusters: 2,
            branch_dim: 6,
            range_scale: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let fail = |msg: String| Err(EmbedError::InvalidConfig(msg));
        if self.n < 4 || self.n % 2 != 0 {
            return fail(format!("resolution n = {} must be even and at least 4", self.n));
        }
        if self.channels.len() < 2 {
            return fail("need at least one conv layer".into());
        }
        if self.channels[0] != 2 {
            return fail("input stage must have the 2 projection channels".into());
        }
        if self.bandwidths.len() + 1 != self.channels.len() {
            return fail(format!(
                "{} bandwidths do not match {} channel stages",
                self.bandwidths.len(),
                self.channels.len()
            ));
        }
        if self.channels.iter().any(|c| *c == 0) {
            return fail("channel counts must be positive".into());
        }
        for pair in self.bandwidths.windows(2) {
            if pair[1] > pair[0] {
                return fail("layer bandwidths must be non-increasing".into());
            }
        }
        for b in &self.bandwidths {
            if *b == 0 || 2 * b > self.n {
                return fail(format!("bandwidth {b} invalid for n = {}", self.n));
            }
        }
        if self.clusters == 0 {
            return fail("cluster count K must be positive".into());
        }
        if self.branch_dim == 0 {
            return fail("branch dimension must be positive".into());
        }
        if !(self.range_scale > 0.0) {
            return fail("range scale must be positive".into());
        }
        Ok(())
    }

    /// Output channel count of the last conv layer (descriptor dimension D).
    pub fn feature_dim(&self) -> usize {
        *self.channels.last().unwrap()
    }

    /// Flattened VLAD size K * D.
    pub fn vlad_dim(&self) -> usize {
        self.clusters * self.feature_dim()
    }

    /// Fused place descriptor dimension.
    pub fn descriptor_dim(&self) -> usize {
        3 * self.branch_dim
    }
}
