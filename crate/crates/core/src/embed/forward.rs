//! Forward pass: branch convolutions, VLAD, projection, fusion.

use crate::harmonics::{
    s2_convolve_zonal, sht_forward, sht_inverse, HarmonicCoefficients, SphereGrid,
};
use crate::sphere::{SphericalImage, SphericalStack};

use super::model::{BranchModel, ConvLayer, ModelParams};
use super::vlad::{vlad_aggregate, VladTrace};
use super::EmbedError;

/// L2-normalized global place descriptor (3 concatenated branch slices).
#[derive(Clone, Debug, PartialEq)]
pub struct PlaceDescriptor {
    pub values: Vec<f64>,
    /// False when every branch saw an empty image.
    pub valid: bool,
}

impl PlaceDescriptor {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn branch_slice(&self, branch: usize) -> &[f64] {
        let dim = self.values.len() / 3;
        &self.values[branch * dim..(branch + 1) * dim]
    }

    pub fn distance_sq(&self, other: &PlaceDescriptor) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &PlaceDescriptor) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn dot(&self, other: &PlaceDescriptor) -> f64 {
        self.values.iter().zip(other.values.iter()).map(|(a, b)| a * b).sum()
    }
}

/// Per-cell local descriptors restricted to valid cells.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    /// Valid cell coordinates, grid order.
    pub cells: Vec<(usize, usize)>,
    /// One D-dimensional descriptor per valid cell.
    pub descriptors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct LayerTrace {
    /// Analysis coefficients of each input channel at the layer bandwidth.
    pub input_coeffs: Vec<HarmonicCoefficients>,
    /// Pre-rectifier grids (synthesis plus bias) per output channel.
    pub preact: Vec<SphereGrid>,
    /// Post-rectifier grids per output channel.
    pub output: Vec<SphereGrid>,
}

#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub layers: Vec<LayerTrace>,
    pub features: FeatureMap,
    pub vlad: VladTrace,
    /// Branch descriptor before fusion (projection output).
    pub branch_desc: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub branches: Vec<BranchTrace>,
    /// Concatenated branch descriptors before the global normalization.
    pub fused: Vec<f64>,
    pub fused_norm: f64,
    pub descriptor: PlaceDescriptor,
}

/// Embed one spherical stack into a place descriptor.
pub fn embed_place(stack: &SphericalStack, model: &ModelParams) -> Result<PlaceDescriptor, EmbedError> {
    Ok(forward_traced(stack, model)?.descriptor)
}

/// Forward pass keeping every intermediate needed by the backward pass.
pub fn forward_traced(stack: &SphericalStack, model: &ModelParams) -> Result<ForwardTrace, EmbedError> {
    if stack.n() != model.config.n {
        return Err(EmbedError::ShapeMismatch { stack: stack.n(), model: model.config.n });
    }
    let mut branches = Vec::with_capacity(3);
    for (image, branch) in stack.layers.iter().zip(model.branches.iter()) {
        branches.push(branch_forward(image, branch, model.config.range_scale)?);
    }

    let mut fused = Vec::with_capacity(model.config.descriptor_dim());
    for b in &branches {
        fused.extend_from_slice(&b.branch_desc);
    }
    let norm = fused.iter().map(|v| v * v).sum::<f64>().sqrt();
    let descriptor = if norm > 0.0 {
        PlaceDescriptor { values: fused.iter().map(|v| v / norm).collect(), valid: true }
    } else {
        PlaceDescriptor { values: vec![0.0; fused.len()], valid: false }
    };
    Ok(ForwardTrace { branches, fused, fused_norm: norm, descriptor })
}

/// One branch: conv stack then VLAD then projection.
pub fn branch_forward(
    image: &SphericalImage,
    branch: &BranchModel,
    range_scale: f64,
) -> Result<BranchTrace, EmbedError> {
    let n = image.n();
    let mut grids: Vec<SphereGrid> = vec![
        SphereGrid::from_data(n, image.distance.data().iter().map(|d| d / range_scale).collect()),
        image.sin_alpha.clone(),
    ];

    let mut layers = Vec::with_capacity(branch.layers.len());
    for layer in &branch.layers {
        let trace = conv_layer_forward(&grids, layer, n)?;
        grids = trace.output.clone();
        layers.push(trace);
    }

    // Local descriptors: the final grids sampled at valid cells.
    let mut cells = Vec::new();
    let mut descriptors = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if image.is_valid(i, j) {
                cells.push((i, j));
                descriptors.push(grids.iter().map(|g| g.at(i, j)).collect());
            }
        }
    }
    let features = FeatureMap { cells, descriptors };
    let vlad = vlad_aggregate(&features.descriptors, &branch.vlad);

    let branch_desc: Vec<f64> = branch
        .projection
        .iter()
        .map(|row| row.iter().zip(vlad.out.iter()).map(|(w, v)| w * v).sum())
        .collect();

    Ok(BranchTrace { layers, features, vlad, branch_desc })
}

fn conv_layer_forward(
    inputs: &[SphereGrid],
    layer: &ConvLayer,
    n: usize,
) -> Result<LayerTrace, EmbedError> {
    debug_assert_eq!(inputs.len(), layer.in_channels);
    let input_coeffs: Vec<HarmonicCoefficients> = inputs
        .iter()
        .map(|g| sht_forward(g, layer.bandwidth))
        .collect::<Result<_, _>>()?;

    let mut preact = Vec::with_capacity(layer.out_channels);
    let mut output = Vec::with_capacity(layer.out_channels);
    for oc in 0..layer.out_channels {
        let mut acc = HarmonicCoefficients::zeros(layer.bandwidth);
        for (ic, coeffs) in input_coeffs.iter().enumerate() {
            let conv = s2_convolve_zonal(coeffs, layer.kernel(ic, oc))?;
            for (a, c) in acc.data_mut().iter_mut().zip(conv.data().iter()) {
                *a += c;
            }
        }
        let mut grid = sht_inverse(&acc, n)?;
        let bias = layer.bias[oc];
        for v in grid.data_mut() {
            *v += bias;
        }
        let mut rect = grid.clone();
        for v in rect.data_mut() {
            *v = v.max(0.0);
        }
        preact.push(grid);
        output.push(rect);
    }
    Ok(LayerTrace { input_coeffs, preact, output })
}
