//! Stack files: magic `PSES`, n (u32), then 3 layers x 2 channels x n*n f32
//! row-major (azimuth-major), then 3 x n*n validity bytes. Little-endian.

use std::fs;
use std::path::Path;

use crate::harmonics::SphereGrid;

use super::image::{SphericalImage, SphericalStack};
use super::SphereError;

pub const STACK_MAGIC: [u8; 4] = *b"PSES";

pub fn save_stack(stack: &SphericalStack, path: &Path) -> Result<(), SphereError> {
    let n = stack.n();
    let mut buf = Vec::with_capacity(8 + 3 * n * n * 9);
    buf.extend_from_slice(&STACK_MAGIC);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for layer in &stack.layers {
        for channel in [&layer.distance, &layer.sin_alpha] {
            for v in channel.data() {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
    }
    for layer in &stack.layers {
        buf.extend(layer.valid.iter().map(|v| u8::from(*v)));
    }
    fs::write(path, buf).map_err(|e| SphereError::Io(e.to_string()))
}

pub fn load_stack(path: &Path) -> Result<SphericalStack, SphereError> {
    let bytes = fs::read(path).map_err(|e| SphereError::Io(e.to_string()))?;
    if bytes.len() < 8 {
        return Err(SphereError::Truncated("header".into()));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != STACK_MAGIC {
        return Err(SphereError::BadMagic(magic));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cells = n * n;
    let expected = 8 + 3 * cells * 2 * 4 + 3 * cells;
    if bytes.len() < expected {
        return Err(SphereError::Truncated(format!(
            "need {expected} bytes for n = {n}, file holds {}",
            bytes.len()
        )));
    }

    let read_channel = |slot: usize| {
        let start = 8 + slot * cells * 4;
        let data: Vec<f64> = (0..cells)
            .map(|k| {
                let at = start + k * 4;
                f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as f64
            })
            .collect();
        SphereGrid::from_data(n, data)
    };
    let mut layers = Vec::with_capacity(3);
    for layer_idx in 0..3 {
        let distance = read_channel(layer_idx * 2);
        let sin_alpha = read_channel(layer_idx * 2 + 1);
        let valid_off = 8 + 6 * cells * 4 + layer_idx * cells;
        let valid: Vec<bool> =
            bytes[valid_off..valid_off + cells].iter().map(|b| *b != 0).collect();
        layers.push(SphericalImage::from_parts(distance, sin_alpha, valid));
    }
    let mut it = layers.into_iter();
    Ok(SphericalStack::new([
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    ]))
}
