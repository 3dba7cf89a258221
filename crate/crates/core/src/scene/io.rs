//! Binary cloud files and text pose files.
//!
//! Cloud format (little-endian): magic `PSEM`, point count as u32, then per
//! point x,y,z as f32 and the label as one byte. Pose files are plain text,
//! one `t tx ty tz qx qy qz qw` line per frame.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion};

use super::types::{Pose, SemanticLabel, SemanticPointCloud};
use super::SceneError;

pub const CLOUD_MAGIC: [u8; 4] = *b"PSEM";

pub fn save_cloud(cloud: &SemanticPointCloud, path: &Path) -> Result<(), SceneError> {
    let mut buf = Vec::with_capacity(8 + cloud.len() * 13);
    buf.extend_from_slice(&CLOUD_MAGIC);
    buf.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    for (p, label) in cloud.iter() {
        for c in p {
            buf.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        buf.push(label.code());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_cloud(path: &Path) -> Result<SemanticPointCloud, SceneError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(SceneError::Truncated { expected: 0, found: 0 });
    }
    let found: [u8; 4] = bytes[0..4].try_into().unwrap();
    if found != CLOUD_MAGIC {
        return Err(SceneError::BadMagic { expected: CLOUD_MAGIC, found });
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let payload = &bytes[8..];
    if payload.len() < count * 13 {
        return Err(SceneError::Truncated { expected: count, found: payload.len() / 13 });
    }
    let mut cloud = SemanticPointCloud::default();
    for i in 0..count {
        let rec = &payload[i * 13..(i + 1) * 13];
        let mut p = [0.0f64; 3];
        for k in 0..3 {
            let v = f32::from_le_bytes(rec[k * 4..(k + 1) * 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(SceneError::NonFinite { index: i });
            }
            p[k] = v as f64;
        }
        let label = SemanticLabel::from_code(rec[12]).ok_or(SceneError::BadLabel(rec[12]))?;
        cloud.push(p, label);
    }
    Ok(cloud)
}

/// One line per frame: `t tx ty tz qx qy qz qw`. `f64` Display round-trips
/// bit-exactly, so rewriting a loaded file reproduces it.
pub fn save_poses(poses: &[(f64, Pose)], path: &Path) -> Result<(), SceneError> {
    let mut out = String::new();
    for (t, pose) in poses {
        let q = pose.rotation.quaternion();
        out += &format!(
            "{} {} {} {} {} {} {} {}\n",
            t, pose.translation.x, pose.translation.y, pose.translation.z, q.i, q.j, q.k, q.w
        );
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_poses(path: &Path) -> Result<Vec<(f64, Pose)>, SceneError> {
    let text = fs::read_to_string(path)?;
    let mut poses = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SceneError::BadPoseLine { line: lineno + 1, reason: e.to_string() })?;
        if fields.len() != 8 {
            return Err(SceneError::BadPoseLine {
                line: lineno + 1,
                reason: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let q = Quaternion::new(fields[7], fields[4], fields[5], fields[6]);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(SceneError::BadPoseLine {
                line: lineno + 1,
                reason: format!("quaternion norm {} too far from 1", q.norm()),
            });
        }
        poses.push((
            fields[0],
            Pose::new([fields[1], fields[2], fields[3]], UnitQuaternion::from_quaternion(q)),
        ));
    }
    Ok(poses)
}
