//! VLAD aggregation: soft-assigned residual sums over the local descriptor
//! set, intra-normalized per cluster and then globally L2-normalized.
//!
//! Descriptors are accumulated in a canonical (lexicographically sorted)
//! order so the output is bit-identical under any permutation of the input
//! set.

use super::model::VladParams;

#[derive(Clone, Debug)]
pub struct VladTrace {
    /// Canonical accumulation order of the input descriptors.
    pub order: Vec<usize>,
    /// Softmax assignments per descriptor (input order), N x K.
    pub assigns: Vec<Vec<f64>>,
    /// Residual sums V(j, k) flattened as raw[k * D + j], before
    /// normalization.
    pub raw: Vec<f64>,
    /// Per-cluster norms of `raw`.
    pub intra_norms: Vec<f64>,
    /// After intra-normalization.
    pub intra: Vec<f64>,
    pub global_norm: f64,
    /// Final normalized VLAD vector (zeros when the feature set is empty).
    pub out: Vec<f64>,
    /// False when N = 0.
    pub valid: bool,
}

/// Aggregate N descriptors of dimension D into the K*D VLAD vector.
/// An empty feature set yields a flagged zero vector.
pub fn vlad_aggregate(features: &[Vec<f64>], params: &VladParams) -> VladTrace {
    let k = params.centers.len();
    let d = params.centers.first().map_or(0, Vec::len);
    let mut trace = VladTrace {
        order: Vec::new(),
        assigns: vec![Vec::new(); features.len()],
        raw: vec![0.0; k * d],
        intra_norms: vec![0.0; k],
        intra: vec![0.0; k * d],
        global_norm: 0.0,
        out: vec![0.0; k * d],
        valid: !features.is_empty(),
    };
    if features.is_empty() {
        return trace;
    }

    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|a, b| lex_cmp(&features[*a], &features[*b]));
    trace.order = order;

    for &i in &trace.order {
        let x = &features[i];
        let mut scores: Vec<f64> = params
            .centers
            .iter()
            .enumerate()
            .map(|(kk, _)| dot(&params.weights[kk], x) + params.biases[kk])
            .collect();
        softmax_in_place(&mut scores);
        for kk in 0..k {
            let a = scores[kk];
            let base = kk * d;
            for j in 0..d {
                trace.raw[base + j] += a * (x[j] - params.centers[kk][j]);
            }
        }
        trace.assigns[i] = scores;
    }

    for kk in 0..k {
        let base = kk * d;
        let norm = trace.raw[base..base + d].iter().map(|v| v * v).sum::<f64>().sqrt();
        trace.intra_norms[kk] = norm;
        if norm > 0.0 {
            for j in 0..d {
                trace.intra[base + j] = trace.raw[base + j] / norm;
            }
        }
    }

    trace.global_norm = trace.intra.iter().map(|v| v * v).sum::<f64>().sqrt();
    if trace.global_norm > 0.0 {
        for (o, v) in trace.out.iter_mut().zip(trace.intra.iter()) {
            *o = v / trace.global_norm;
        }
    }
    trace
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(super) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_cluster_params(center: Vec<f64>) -> VladParams {
        let d = center.len();
        VladParams { centers: vec![center], weights: vec![vec![0.0; d]], biases: vec![0.0] }
    }

    #[test]
    fn residual_sum_matches_the_worked_example() {
        // K=1, w=0, b=0, x = {(1,0), (0,1)}, c = (0,0): V = (1, 1) before
        // normalization.
        let params = single_cluster_params(vec![0.0, 0.0]);
        let trace = vlad_aggregate(&[vec![1.0, 0.0], vec![0.0, 1.0]], &params);
        assert_eq!(trace.raw, vec![1.0, 1.0]);
        // Normalized output: (1,1)/sqrt(2).
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((trace.out[0] - inv).abs() < 1e-12);
        assert!((trace.out[1] - inv).abs() < 1e-12);
    }

    #[test]
    fn descriptor_equal_to_its_center_gives_zero_vector() {
        let params = single_cluster_params(vec![0.3, -0.7]);
        let trace = vlad_aggregate(&[vec![0.3, -0.7]], &params);
        assert_eq!(trace.raw, vec![0.0, 0.0]);
        assert_eq!(trace.out, vec![0.0, 0.0]);
        assert!(trace.valid);
    }

    #[test]
    fn empty_feature_set_is_flagged() {
        let params = single_cluster_params(vec![0.0, 0.0]);
        let trace = vlad_aggregate(&[], &params);
        assert!(!trace.valid);
        assert!(trace.out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn permutation_invariance_is_bit_level() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let d = 5;
        let params = VladParams {
            centers: (0..3).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            weights: (0..3).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            biases: vec![0.1, -0.2, 0.05],
        };
        let features: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let base = vlad_aggregate(&features, &params);

        let mut shuffled = features.clone();
        shuffled.reverse();
        shuffled.swap(0, 7);
        shuffled.swap(3, 21);
        let permuted = vlad_aggregate(&shuffled, &params);
        assert_eq!(base.raw, permuted.raw);
        assert_eq!(base.out, permuted.out);
    }

    #[test]
    fn softmax_assignments_sum_to_one() {
        let params = VladParams {
            centers: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            weights: vec![vec![2.0, -1.0], vec![-0.5, 0.5]],
            biases: vec![0.3, -0.3],
        };
        let trace = vlad_aggregate(&[vec![0.5, 0.25], vec![-1.0, 2.0]], &params);
        for a in &trace.assigns {
            let total: f64 = a.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(a.iter().all(|v| *v >= 0.0));
        }
    }
}
