//! Recall, precision-recall curves, and the combined retrieval report.

use crate::scene::Point3;

use super::index::DescriptorIndex;
use super::EvalError;

#[derive(Clone, Copy, Debug)]
pub enum TopSpec {
    /// Top-N retrievals.
    Count(usize),
    /// Top fraction of the index size (0.01 = top 1%), rounded up.
    Fraction(f64),
}

impl TopSpec {
    pub fn resolve(&self, index_size: usize) -> usize {
        match self {
            TopSpec::Count(n) => (*n).max(1),
            TopSpec::Fraction(p) => (p * index_size as f64).ceil().max(1.0) as usize,
        }
    }
}

/// Fraction of queries whose top-N ranked ids contain a true match.
/// `truth[q]` holds the acceptable ids for query q.
pub fn recall_at(
    ranked_ids: &[Vec<u64>],
    truth: &[std::collections::HashSet<u64>],
    top: TopSpec,
    index_size: usize,
) -> Result<f64, EvalError> {
    if ranked_ids.is_empty() {
        return Err(EvalError::EmptyQueries);
    }
    assert_eq!(ranked_ids.len(), truth.len(), "one truth set per query");
    let n = top.resolve(index_size);
    let hits = ranked_ids
        .iter()
        .zip(truth.iter())
        .filter(|(ids, t)| ids.iter().take(n).any(|id| t.contains(id)))
        .count();
    Ok(hits as f64 / ranked_ids.len() as f64)
}

#[derive(Clone, Debug, Default)]
pub struct PrCurve {
    /// (recall, precision) per descending score threshold.
    pub points: Vec<(f64, f64)>,
    pub ap: f64,
}

/// Precision-recall over descending unique score thresholds plus the
/// average precision score AP = sum (R_i - R_{i-1}) * P_i. Input: each
/// query's best-match similarity score and correctness flag.
pub fn pr_curve(scored: &[(f64, bool)]) -> Result<PrCurve, EvalError> {
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total_correct = sorted.iter().filter(|(_, c)| *c).count();
    if total_correct == 0 {
        return Ok(PrCurve { points: vec![(0.0, 0.0)], ap: 0.0 });
    }

    let mut points = Vec::new();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < sorted.len() {
        // Take every entry tied at this score as one threshold step.
        let score = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == score {
            seen += 1;
            if sorted[i].1 {
                tp += 1;
            }
            i += 1;
        }
        let precision = tp as f64 / seen as f64;
        let recall = tp as f64 / total_correct as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push((recall, precision));
    }
    Ok(PrCurve { points, ap })
}

/// Retrieval report for a query set against an index: recall at 1/10/top-1%
/// and the PR curve of best-match similarities.
#[derive(Clone, Debug)]
pub struct EvalReport {
    pub recall_at_1: f64,
    pub recall_at_10: f64,
    pub recall_top_1pct: f64,
    pub pr: PrCurve,
    pub queries: usize,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        format!(
            "queries: {}\nrecall@1: {:.4}\nrecall@10: {:.4}\nrecall@top1%: {:.4}\nAP: {:.4}\n",
            self.queries, self.recall_at_1, self.recall_at_10, self.recall_top_1pct, self.pr.ap
        )
    }

    pub fn pr_to_csv(&self) -> String {
        let mut out = String::from("recall,precision\n");
        for (r, p) in &self.pr.points {
            out += &format!("{r},{p}\n");
        }
        out
    }
}

/// Run every query against the index; a retrieval is correct when the
/// retrieved place lies within `r_pos` meters of the query's true position.
pub fn evaluate(
    index: &DescriptorIndex,
    queries: &[(Vec<f64>, Point3)],
    r_pos: f64,
) -> Result<EvalReport, EvalError> {
    if queries.is_empty() {
        return Err(EvalError::EmptyQueries);
    }
    let k = 10.max((0.01 * index.len() as f64).ceil() as usize).min(index.len());
    let truth: Vec<std::collections::HashSet<u64>> = queries
        .iter()
        .map(|(_, pos)| {
            index
                .ids()
                .iter()
                .zip(index.positions().iter())
                .filter(|(_, p)| dist(**p, *pos) <= r_pos)
                .map(|(id, _)| *id)
                .collect()
        })
        .collect();

    let mut ranked = Vec::with_capacity(queries.len());
    let mut scored = Vec::with_capacity(queries.len());
    for ((q, _), t) in queries.iter().zip(truth.iter()) {
        let (hits, _) = index.query_knn(q, k)?;
        let best = hits[0];
        // Similarity for the PR curve: cosine of unit vectors.
        let similarity = 1.0 - best.1 * best.1 / 2.0;
        scored.push((similarity, t.contains(&best.0)));
        ranked.push(hits.into_iter().map(|(id, _)| id).collect::<Vec<u64>>());
    }

    Ok(EvalReport {
        recall_at_1: recall_at(&ranked, &truth, TopSpec::Count(1), index.len())?,
        recall_at_10: recall_at(&ranked, &truth, TopSpec::Count(10), index.len())?,
        recall_top_1pct: recall_at(&ranked, &truth, TopSpec::Fraction(0.01), index.len())?,
        pr: pr_curve(&scored)?,
        queries: queries.len(),
    })
}

fn dist(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn full_recall_when_first_hits_are_correct() {
        let ranked = vec![vec![1u64, 2], vec![2, 1]];
        let truth: Vec<HashSet<u64>> =
            vec![[1].into_iter().collect(), [2].into_iter().collect()];
        assert_eq!(recall_at(&ranked, &truth, TopSpec::Count(1), 2).unwrap(), 1.0);
    }

    #[test]
    fn half_recall_example() {
        let ranked = vec![vec![1u64, 2], vec![1, 2]];
        let truth: Vec<HashSet<u64>> =
            vec![[1].into_iter().collect(), [2].into_iter().collect()];
        assert_eq!(recall_at(&ranked, &truth, TopSpec::Count(1), 2).unwrap(), 0.5);
    }

    #[test]
    fn top_percent_uses_the_ceiling() {
        assert_eq!(TopSpec::Fraction(0.01).resolve(200), 2);
        assert_eq!(TopSpec::Fraction(0.01).resolve(150), 2);
        assert_eq!(TopSpec::Fraction(0.01).resolve(50), 1);
    }

    #[test]
    fn recall_is_monotone_in_n() {
        let ranked = vec![vec![3u64, 1, 2], vec![2, 3, 1], vec![3, 2, 1]];
        let truth: Vec<HashSet<u64>> = vec![
            [1].into_iter().collect(),
            [2].into_iter().collect(),
            [1].into_iter().collect(),
        ];
        let mut prev = 0.0;
        for n in 1..=3 {
            let r = recall_at(&ranked, &truth, TopSpec::Count(n), 3).unwrap();
            assert!(r >= prev);
            prev = r;
        }
        assert_eq!(prev, 1.0);
    }

    #[test]
    fn empty_queries_are_rejected() {
        assert!(matches!(
            recall_at(&[], &[], TopSpec::Count(1), 10),
            Err(EvalError::EmptyQueries)
        ));
    }

    #[test]
    fn ap_is_one_when_everything_is_correct() {
        let curve = pr_curve(&[(0.9, true), (0.5, true), (0.7, true)]).unwrap();
        assert!((curve.ap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ap_is_zero_when_nothing_is_correct() {
        let curve = pr_curve(&[(0.9, false), (0.5, false)]).unwrap();
        assert_eq!(curve.ap, 0.0);
    }

    #[test]
    fn ap_matches_the_worked_example() {
        let curve = pr_curve(&[(0.9, true), (0.8, false), (0.7, true)]).unwrap();
        assert!((curve.ap - 0.8333333333).abs() < 1e-6, "ap = {}", curve.ap);
    }

    #[test]
    fn ap_matches_brute_force_threshold_enumeration() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let scored: Vec<(f64, bool)> = (0..25)
                .map(|_| (rng.gen_range(0.0..1.0), rng.gen::<f64>() < 0.5))
                .collect();
            let curve = pr_curve(&scored).unwrap();

            // Oracle: enumerate every unique threshold directly.
            let mut thresholds: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
            thresholds.sort_by(|a, b| b.total_cmp(a));
            thresholds.dedup();
            let total_correct = scored.iter().filter(|(_, c)| *c).count();
            let mut ap = 0.0;
            let mut prev_r = 0.0;
            if total_correct > 0 {
                for t in thresholds {
                    let picked: Vec<&(f64, bool)> =
                        scored.iter().filter(|(s, _)| *s >= t).collect();
                    let tp = picked.iter().filter(|(_, c)| *c).count();
                    let p = tp as f64 / picked.len() as f64;
                    let r = tp as f64 / total_correct as f64;
                    ap += (r - prev_r) * p;
                    prev_r = r;
                }
            }
            assert!((curve.ap - ap).abs() < 1e-9, "{} vs {}", curve.ap, ap);
        }
    }

    #[test]
    fn pr_recall_is_non_decreasing() {
        let curve =
            pr_curve(&[(0.9, true), (0.8, false), (0.6, true), (0.4, false), (0.2, true)])
                .unwrap();
        let mut prev = 0.0;
        for (r, _) in &curve.points {
            assert!(*r >= prev);
            prev = *r;
        }
    }
}
