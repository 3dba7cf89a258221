//! Sequence matching over frame-difference matrices.

use super::EvalError;

/// Cosine feature differences: rows are testing frames, columns reference
/// frames, entries 1 - <t_i, r_j> in [0, 2] for unit descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl DifferenceMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> DifferenceMatrix {
        assert_eq!(data.len(), rows * cols);
        DifferenceMatrix { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

pub fn difference_matrix(
    test: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<DifferenceMatrix, EvalError> {
    if test.is_empty() || reference.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let dim = test[0].len();
    for row in test.iter().chain(reference.iter()) {
        if row.len() != dim {
            return Err(EvalError::DimMismatch(dim, row.len()));
        }
    }
    let mut data = Vec::with_capacity(test.len() * reference.len());
    for t in test {
        for r in reference {
            let dot: f64 = t.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
            data.push(1.0 - dot);
        }
    }
    Ok(DifferenceMatrix::new(test.len(), reference.len(), data))
}

/// SeqSLAM-style local contrast enhancement: each entry standardized by the
/// mean/stdev of a sliding window along its column (the testing axis). The
/// window keeps its full width by clamping its position at the borders;
/// zero-variance windows map to 0.
pub fn local_normalize(
    matrix: &DifferenceMatrix,
    window: usize,
) -> Result<DifferenceMatrix, EvalError> {
    if window < 1 || window % 2 == 0 {
        return Err(EvalError::BadWindow(window));
    }
    let rows = matrix.rows;
    let w_eff = window.min(rows);
    let mut out = DifferenceMatrix::new(rows, matrix.cols, vec![0.0; rows * matrix.cols]);
    for j in 0..matrix.cols {
        for i in 0..rows {
            let half = w_eff / 2;
            let start = i.saturating_sub(half).min(rows - w_eff);
            let slice: Vec<f64> = (start..start + w_eff).map(|r| matrix.at(r, j)).collect();
            let mean = slice.iter().sum::<f64>() / w_eff as f64;
            let var = slice.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / w_eff as f64;
            let std = var.sqrt();
            let v = if std < 1e-12 { 0.0 } else { (matrix.at(i, j) - mean) / std };
            out.set(i, j, v);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SeqMatchConfig {
    /// Trajectory window length in frames.
    pub window: usize,
    /// Candidate slopes (reference frames per test frame).
    pub velocities: Vec<f64>,
    /// Scores above this report no-match.
    pub threshold: f64,
}

impl Default for SeqMatchConfig {
    fn default() -> SeqMatchConfig {
        SeqMatchConfig {
            window: 10,
            velocities: vec![0.8, 0.9, 1.0, 1.1, 1.2],
            threshold: -0.2,
        }
    }
}

/// For each test frame, score straight constant-velocity lines of length
/// `window` through the (normalized) matrix and keep the best reference
/// index. Frames whose window or line leaves the matrix yield no-match;
/// ties resolve to the smallest reference index.
pub fn sequence_match(
    matrix: &DifferenceMatrix,
    cfg: &SeqMatchConfig,
) -> Result<Vec<(Option<usize>, f64)>, EvalError> {
    let v = cfg.window;
    if matrix.rows < v || matrix.cols < v {
        return Err(EvalError::MatrixTooSmall { rows: matrix.rows, cols: matrix.cols, v });
    }
    let back = (v - 1) / 2;
    let fwd = v - 1 - back;
    let mut out = Vec::with_capacity(matrix.rows);
    for i in 0..matrix.rows {
        if i < back || i + fwd >= matrix.rows {
            out.push((None, f64::INFINITY));
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..matrix.cols {
            for s in &cfg.velocities {
                let mut cost = 0.0;
                let mut inside = true;
                for t in -(back as i64)..=(fwd as i64) {
                    let jj = j as i64 + (s * t as f64).round() as i64;
                    if jj < 0 || jj >= matrix.cols as i64 {
                        inside = false;
                        break;
                    }
                    cost += matrix.at((i as i64 + t) as usize, jj as usize);
                }
                if !inside {
                    continue;
                }
                cost /= v as f64;
                if best.is_none() || cost < best.unwrap().1 {
                    best = Some((j, cost));
                }
            }
        }
        match best {
            Some((j, score)) if score <= cfg.threshold => out.push((Some(j), score)),
            Some((_, score)) => out.push((None, score)),
            None => out.push((None, f64::INFINITY)),
        }
    }
    Ok(out)
}
