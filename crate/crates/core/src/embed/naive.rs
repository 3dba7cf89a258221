//! Orientation-sensitive contrast baseline: the raw spherical stack,
//! flattened and L2-normalized. No harmonics, no aggregation, so any
//! azimuth rotation scrambles it.

use crate::sphere::SphericalStack;

use super::forward::PlaceDescriptor;

pub fn naive_descriptor(stack: &SphericalStack, range_scale: f64) -> PlaceDescriptor {
    let n = stack.n();
    let mut values = Vec::with_capacity(3 * 2 * n * n);
    for layer in &stack.layers {
        values.extend(layer.distance.data().iter().map(|d| d / range_scale));
        values.extend_from_slice(layer.sin_alpha.data());
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
        PlaceDescriptor { values, valid: true }
    } else {
        PlaceDescriptor { values, valid: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphericalImage;

    #[test]
    fn unit_norm_and_rotation_sensitivity() {
        let n = 8;
        let mut img = SphericalImage::empty(n);
        for i in 0..n {
            for j in 0..n {
                img.distance.set(i, j, (i * n + j) as f64 + 1.0);
                img.sin_alpha.set(i, j, 0.5);
                img.valid[i * n + j] = true;
            }
        }
        let stack = SphericalStack::new([img.clone(), img.clone(), img]);
        let base = naive_descriptor(&stack, 10.0);
        let norm: f64 = base.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);

        let rotated = naive_descriptor(&stack.shifted_columns(4), 10.0);
        assert!(base.distance(&rotated) > 0.1, "flattened baseline must move under rotation");
    }

    #[test]
    fn empty_stack_is_flagged() {
        let desc = naive_descriptor(&SphericalStack::empty(8), 10.0);
        assert!(!desc.valid);
    }
}
