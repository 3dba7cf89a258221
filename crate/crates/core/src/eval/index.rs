//! Exact (brute-force) descriptor index.

use crate::scene::Point3;

use super::EvalError;

/// Rows are unit-normalized place descriptors with unique ids and
/// ground-truth positions. Queries are exact nearest-neighbor scans.
#[derive(Clone, Debug)]
pub struct DescriptorIndex {
    dim: usize,
    ids: Vec<u64>,
    positions: Vec<Point3>,
    rows: Vec<f64>,
    /// Rows that arrived visibly non-unit and were re-normalized.
    pub renormalized: usize,
}

/// Rows farther than this from unit norm count as re-normalization events.
const NORM_WARN_TOLERANCE: f64 = 1e-4;

pub fn build_index(
    descriptors: &[Vec<f64>],
    ids: &[u64],
    positions: &[Point3],
) -> Result<DescriptorIndex, EvalError> {
    if descriptors.is_empty() {
        return Err(EvalError::EmptyIndex);
    }
    if descriptors.len() != ids.len() || ids.len() != positions.len() {
        return Err(EvalError::LengthMismatch);
    }
    let dim = descriptors[0].len();
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(*id) {
            return Err(EvalError::DuplicateId(*id));
        }
    }
    let mut rows = Vec::with_capacity(descriptors.len() * dim);
    let mut renormalized = 0usize;
    for d in descriptors {
        if d.len() != dim {
            return Err(EvalError::DimMismatch(dim, d.len()));
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_WARN_TOLERANCE {
            renormalized += 1;
        }
        if norm > 0.0 {
            rows.extend(d.iter().map(|v| v / norm));
        } else {
            rows.extend(std::iter::repeat(0.0).take(dim));
        }
    }
    Ok(DescriptorIndex {
        dim,
        ids: ids.to_vec(),
        positions: positions.to_vec(),
        rows,
        renormalized,
    })
}

impl DescriptorIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position_of(&self, id: u64) -> Option<Point3> {
        self.ids.iter().position(|i| *i == id).map(|i| self.positions[i])
    }

    /// Exact k nearest neighbors by Euclidean distance, ties broken by id.
    /// Returns the ranked (id, distance) list and whether k was clamped to
    /// the index size.
    pub fn query_knn(&self, query: &[f64], k: usize) -> Result<(Vec<(u64, f64)>, bool), EvalError> {
        if self.is_empty() {
            return Err(EvalError::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(EvalError::DimMismatch(self.dim, query.len()));
        }
        assert!(k >= 1, "k must be at least 1");
        let clamped = k > self.len();
        let k = k.min(self.len());
        let mut scored: Vec<(f64, u64)> = (0..self.len())
            .map(|i| {
                let d2: f64 = self
                    .row(i)
                    .iter()
                    .zip(query.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2.sqrt(), self.ids[i])
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(k);
        Ok((scored.into_iter().map(|(d, id)| (id, d)).collect(), clamped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    fn sample_index() -> DescriptorIndex {
        build_index(
            &[
                unit(vec![1.0, 0.0, 0.0]),
                unit(vec![0.0, 1.0, 0.0]),
                unit(vec![1.0, 1.0, 0.0]),
            ],
            &[10, 20, 30],
            &[[0.0; 3], [5.0, 0.0, 0.0], [10.0, 0.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn builds_with_expected_size() {
        let index = sample_index();
        assert_eq!(index.len(), 3);
        assert_eq!(index.dim(), 3);
        assert_eq!(index.renormalized, 0);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = build_index(
            &[unit(vec![1.0, 0.0]), unit(vec![0.0, 1.0])],
            &[7, 7],
            &[[0.0; 3]; 2],
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::DuplicateId(7)));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(build_index(&[], &[], &[]), Err(EvalError::EmptyIndex)));
    }

    #[test]
    fn non_unit_rows_are_normalized_with_a_warning() {
        let index = build_index(
            &[vec![2.0, 0.0], unit(vec![0.0, 1.0])],
            &[1, 2],
            &[[0.0; 3]; 2],
        )
        .unwrap();
        assert_eq!(index.renormalized, 1);
        let norm: f64 = index.row(0).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_query_hits_its_own_row_first() {
        let index = sample_index();
        let (hits, clamped) = index.query_knn(&unit(vec![0.0, 1.0, 0.0]), 2).unwrap();
        assert!(!clamped);
        assert_eq!(hits[0].0, 20);
        assert!(hits[0].1 < 1e-12);
    }

    #[test]
    fn ranking_matches_brute_force_sort() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let dim = 8;
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| unit((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let ids: Vec<u64> = (0..40).collect();
        let positions = vec![[0.0; 3]; 40];
        let index = build_index(&rows, &ids, &positions).unwrap();
        for _ in 0..10 {
            let q = unit((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let (hits, _) = index.query_knn(&q, 5).unwrap();
            // Independent exhaustive sort.
            let mut all: Vec<(f64, u64)> = rows
                .iter()
                .zip(ids.iter())
                .map(|(r, id)| {
                    let d2: f64 =
                        r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2.sqrt(), *id)
                })
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (hit, expect) in hits.iter().zip(all.iter()) {
                assert_eq!(hit.0, expect.1);
            }
        }
    }

    #[test]
    fn oversized_k_is_clamped_with_a_flag() {
        let index = sample_index();
        let (hits, clamped) = index.query_knn(&unit(vec![1.0, 0.0, 0.0]), 10).unwrap();
        assert!(clamped);
        assert_eq!(hits.len(), 3);
    }

    #[test]
    fn equidistant_ties_break_by_id() {
        let index = build_index(
            &[unit(vec![1.0, 0.0]), unit(vec![1.0, 0.0]), unit(vec![0.0, 1.0])],
            &[42, 7, 9],
            &[[0.0; 3]; 3],
        )
        .unwrap();
        let (hits, _) = index.query_knn(&unit(vec![1.0, 0.0]), 2).unwrap();
        assert_eq!(hits[0].0, 7);
        assert_eq!(hits[1].0, 42);
    }
}
