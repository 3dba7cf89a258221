//! Exact reverse-mode gradients for the embedding.
//!
//! The harmonic stages are linear, so their backward passes are adjoints:
//! the adjoint of synthesis is the unweighted conjugate analysis, and the
//! adjoint of the weighted analysis is synthesis followed by the quadrature
//! weights. The zonal multiplier is diagonal and real, hence self-adjoint
//! per degree.

use crate::harmonics::{
    colatitude_weights, s2_convolve_zonal, sht_inverse, sht_synthesis_adjoint,
    HarmonicCoefficients, SphereGrid, zonal_nu,
};
use crate::sphere::SphericalStack;

use super::forward::{forward_traced, BranchTrace, ForwardTrace, PlaceDescriptor};
use super::model::{BranchModel, ModelParams};
use super::EmbedError;

/// Forward pass plus gradients of `upstream . descriptor` with respect to
/// every parameter (flat, canonical layout order).
pub fn forward_with_gradients(
    stack: &SphericalStack,
    model: &ModelParams,
    upstream: &[f64],
) -> Result<(PlaceDescriptor, Vec<f64>), EmbedError> {
    let trace = forward_traced(stack, model)?;
    let grads = backward(&trace, model, upstream);
    Ok((trace.descriptor, grads))
}

/// Gradients of `sum_i upstream[i] * descriptor[i]` w.r.t. the parameters.
pub fn backward(trace: &ForwardTrace, model: &ModelParams, upstream: &[f64]) -> Vec<f64> {
    assert_eq!(upstream.len(), model.config.descriptor_dim());
    let mut grads = GradSink::new(model);

    if !trace.descriptor.valid {
        return grads.into_flat();
    }

    // Global L2 normalization: v = u / |u|.
    let v = &trace.descriptor.values;
    let vdot: f64 = v.iter().zip(upstream.iter()).map(|(a, b)| a * b).sum();
    let d_fused: Vec<f64> = upstream
        .iter()
        .zip(v.iter())
        .map(|(g, vi)| (g - vi * vdot) / trace.fused_norm)
        .collect();

    let dim = model.config.branch_dim;
    for (b, branch_trace) in trace.branches.iter().enumerate() {
        let d_desc = &d_fused[b * dim..(b + 1) * dim];
        if d_desc.iter().all(|g| *g == 0.0) {
            continue;
        }
        branch_backward(branch_trace, &model.branches[b], &model.config, d_desc, &mut grads.branches[b]);
    }
    grads.into_flat()
}

/// Gradient container mirroring the parameter structure.
struct GradSink {
    branches: Vec<BranchGrads>,
}

pub(super) struct BranchGrads {
    pub kernels: Vec<Vec<Vec<f64>>>, // per layer: [in*out][l]
    pub bias: Vec<Vec<f64>>,         // per layer: [out]
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub vbias: Vec<f64>,
    pub projection: Vec<Vec<f64>>,
}

impl GradSink {
    fn new(model: &ModelParams) -> GradSink {
        let mk = |branch: &BranchModel| BranchGrads {
            kernels: branch
                .layers
                .iter()
                .map(|l| vec![vec![0.0; l.bandwidth]; l.kernels.len()])
                .collect(),
            bias: branch.layers.iter().map(|l| vec![0.0; l.out_channels]).collect(),
            centers: branch.vlad.centers.iter().map(|c| vec![0.0; c.len()]).collect(),
            weights: branch.vlad.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            vbias: vec![0.0; branch.vlad.biases.len()],
            projection: branch.projection.iter().map(|r| vec![0.0; r.len()]).collect(),
        };
        GradSink { branches: model.branches.iter().map(mk).collect() }
    }

    fn into_flat(self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in self.branches {
            for (layer_k, layer_b) in b.kernels.iter().zip(b.bias.iter()) {
                for k in layer_k {
                    out.extend_from_slice(k);
                }
                out.extend_from_slice(layer_b);
            }
            for c in &b.centers {
                out.extend_from_slice(c);
            }
            for w in &b.weights {
                out.extend_from_slice(w);
            }
            out.extend_from_slice(&b.vbias);
            for r in &b.projection {
                out.extend_from_slice(r);
            }
        }
        out
    }
}

fn branch_backward(
    trace: &BranchTrace,
    branch: &BranchModel,
    config: &super::ModelConfig,
    d_desc: &[f64],
    grads: &mut BranchGrads,
) {
    let vlad = &trace.vlad;
    let kd = config.vlad_dim();
    let d = config.feature_dim();
    let k = config.clusters;

    // Projection: desc_r = sum_c P[r][c] * out[c].
    let mut d_vout = vec![0.0; kd];
    for (r, row) in branch.projection.iter().enumerate() {
        let g = d_desc[r];
        for (c, w) in row.iter().enumerate() {
            grads.projection[r][c] += g * vlad.out[c];
            d_vout[c] += w * g;
        }
    }

    if !vlad.valid {
        return;
    }

    // Global normalization of the VLAD vector.
    let mut d_intra = vec![0.0; kd];
    if vlad.global_norm > 0.0 {
        let dot: f64 = vlad.out.iter().zip(d_vout.iter()).map(|(a, b)| a * b).sum();
        for i in 0..kd {
            d_intra[i] = (d_vout[i] - vlad.out[i] * dot) / vlad.global_norm;
        }
    }

    // Intra (per-cluster) normalization.
    let mut d_raw = vec![0.0; kd];
    for kk in 0..k {
        let base = kk * d;
        let norm = vlad.intra_norms[kk];
        if norm > 0.0 {
            let blk_dot: f64 =
                (0..d).map(|j| vlad.intra[base + j] * d_intra[base + j]).sum();
            for j in 0..d {
                d_raw[base + j] =
                    (d_intra[base + j] - vlad.intra[base + j] * blk_dot) / norm;
            }
        }
    }

    // Residual sums and soft assignments.
    let features = &trace.features.descriptors;
    let mut d_features = vec![vec![0.0; d]; features.len()];
    for (i, x) in features.iter().enumerate() {
        let a = &vlad.assigns[i];
        let mut residual_dot = vec![0.0; k]; // r_ik = sum_j G (x_ij - c_kj)
        for kk in 0..k {
            let base = kk * d;
            residual_dot[kk] = (0..d)
                .map(|j| d_raw[base + j] * (x[j] - branch.vlad.centers[kk][j]))
                .sum();
        }
        let sbar: f64 = (0..k).map(|kk| a[kk] * residual_dot[kk]).sum();
        for kk in 0..k {
            let base = kk * d;
            let ds = a[kk] * (residual_dot[kk] - sbar);
            grads.vbias[kk] += ds;
            for j in 0..d {
                grads.centers[kk][j] -= a[kk] * d_raw[base + j];
                grads.weights[kk][j] += ds * x[j];
                d_features[i][j] += a[kk] * d_raw[base + j] + ds * branch.vlad.weights[kk][j];
            }
        }
    }

    // Scatter feature gradients back onto the last layer's output grids.
    let n = config.n;
    let last = branch.layers.len() - 1;
    let mut d_out: Vec<SphereGrid> =
        vec![SphereGrid::zeros(n); branch.layers[last].out_channels];
    for (cell, df) in trace.features.cells.iter().zip(d_features.iter()) {
        for (ch, g) in d_out.iter_mut().enumerate() {
            g.set(cell.0, cell.1, df[ch]);
        }
    }

    // Conv layers, last to first.
    let cell_w: Vec<f64> = colatitude_weights(n)
        .into_iter()
        .map(|w| w * std::f64::consts::TAU / n as f64)
        .collect();
    for layer_idx in (0..branch.layers.len()).rev() {
        let layer = &branch.layers[layer_idx];
        let ltrace = &trace.layers[layer_idx];
        let bw = layer.bandwidth;

        // Rectifier, then bias, then the synthesis adjoint per channel.
        let mut d_coeffs_out = Vec::with_capacity(layer.out_channels);
        for oc in 0..layer.out_channels {
            let mut d_pre = d_out[oc].clone();
            for (v, pre) in d_pre.data_mut().iter_mut().zip(ltrace.preact[oc].data().iter()) {
                if *pre <= 0.0 {
                    *v = 0.0;
                }
            }
            grads.bias[layer_idx][oc] += d_pre.data().iter().sum::<f64>();
            d_coeffs_out.push(sht_synthesis_adjoint(&d_pre, bw).expect("bandwidth checked in forward"));
        }

        // Kernel gradients: nu_l * Re sum_m a_in[l,m] * conj(adj_out[l,m]).
        for ic in 0..layer.in_channels {
            let a_in = &ltrace.input_coeffs[ic];
            for (oc, adj) in d_coeffs_out.iter().enumerate() {
                let slot = &mut grads.kernels[layer_idx][ic * layer.out_channels + oc];
                for l in 0..bw {
                    let mut acc = 0.0;
                    for m in -(l as i64)..=(l as i64) {
                        acc += (a_in.get(l, m) * adj.get(l, m).conj()).re;
                    }
                    slot[l] += zonal_nu(l) * acc;
                }
            }
        }

        // Input-grid gradients feed the previous layer (skip at layer 0).
        if layer_idx > 0 {
            let mut next_d_out = Vec::with_capacity(layer.in_channels);
            for ic in 0..layer.in_channels {
                let mut z = HarmonicCoefficients::zeros(bw);
                for (oc, adj) in d_coeffs_out.iter().enumerate() {
                    let conv = s2_convolve_zonal(adj, layer.kernel(ic, oc))
                        .expect("kernel length fixed by layer");
                    for (zv, cv) in z.data_mut().iter_mut().zip(conv.data().iter()) {
                        *zv += cv;
                    }
                }
                let mut g = sht_inverse(&z, n).expect("resolution checked in forward");
                for i in 0..n {
                    for j in 0..n {
                        let w = cell_w[j];
                        g.set(i, j, g.at(i, j) * w);
                    }
                }
                next_d_out.push(g);
            }
            d_out = next_d_out;
        }
    }
}
