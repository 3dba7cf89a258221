//! Deterministic synthetic scenarios: a row of places along +x, each with a
//! ground disc, box buildings, thin vertical poles, and dynamic boxes.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::types::{Point3, Pose, SemanticLabel, SemanticPointCloud};
use super::SceneError;

/// Sensor visibility radius for synthesized scans. Kept below half of the
/// default negative-mining radius (50 m) so scans of negative pairs never
/// share scene content.
pub const SCAN_RANGE_M: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_places: usize,
    pub place_spacing: f64,
    pub buildings_per_place: usize,
    pub poles_per_place: usize,
    pub dynamics_per_place: usize,
    pub points_per_object: usize,
    pub sensor_height: f64,
}

impl Default for ScenarioSpec {
    fn default() -> ScenarioSpec {
        ScenarioSpec {
            seed: 7,
            n_places: 16,
            place_spacing: 5.0,
            buildings_per_place: 2,
            poles_per_place: 2,
            dynamics_per_place: 1,
            points_per_object: 120,
            sensor_height: 1.5,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.n_places == 0 {
            return Err(SceneError::InvalidSpec("n_places must be positive".into()));
        }
        if !(self.place_spacing > 0.0) {
            return Err(SceneError::InvalidSpec("place_spacing must be positive".into()));
        }
        if !self.sensor_height.is_finite() {
            return Err(SceneError::InvalidSpec("sensor_height must be finite".into()));
        }
        Ok(())
    }
}

/// A generated world plus the per-place scan frames.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    /// Ground-truth place centers (at ground level).
    pub place_centers: Vec<Point3>,
    /// All object points in the world frame.
    pub world: SemanticPointCloud,
    /// Per place: the scan in sensor coordinates and the noiseless pose
    /// mapping sensor coordinates into the world frame.
    pub frames: Vec<(SemanticPointCloud, Pose)>,
}

impl Scenario {
    /// Sensor pose standing at a place center (optionally offset), heading
    /// rotated by `yaw`.
    pub fn sensor_pose(&self, center: Point3, offset: [f64; 2], yaw: f64) -> Pose {
        let t = [center[0] + offset[0], center[1] + offset[1], self.spec.sensor_height];
        Pose::new(t, nalgebra::UnitQuaternion::from_axis_angle(&nalgebra::Vector3::z_axis(), yaw))
    }

    /// Synthesize the scan seen from `pose`: world points within
    /// [`SCAN_RANGE_M`] of the sensor, expressed in sensor coordinates.
    pub fn scan_from(&self, pose: &Pose) -> SemanticPointCloud {
        let inv = pose.inverse();
        let mut cloud = SemanticPointCloud::default();
        let range2 = SCAN_RANGE_M * SCAN_RANGE_M;
        for (p, label) in self.world.iter() {
            let dx = p[0] - pose.translation.x;
            let dy = p[1] - pose.translation.y;
            let dz = p[2] - pose.translation.z;
            if dx * dx + dy * dy + dz * dz <= range2 {
                cloud.push(inv.apply(*p), label);
            }
        }
        cloud
    }
}

/// Generate a scenario. Pure function of the spec: the same spec yields
/// bit-identical output.
pub fn synth_scenario(spec: &ScenarioSpec) -> Result<Scenario, SceneError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut world = SemanticPointCloud::default();
    let mut place_centers = Vec::with_capacity(spec.n_places);

    for k in 0..spec.n_places {
        let center = [k as f64 * spec.place_spacing, 0.0, 0.0];
        place_centers.push(center);

        let disc_radius = 0.9 * spec.place_spacing;
        for _ in 0..spec.points_per_object {
            let r = disc_radius * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            world.push(
                [center[0] + r * a.cos(), center[1] + r * a.sin(), 0.0],
                SemanticLabel::Ground,
            );
        }

        for _ in 0..spec.buildings_per_place {
            let c = offset_from(&mut rng, center, 4.0, 14.0);
            let (w, d, h) = (
                rng.gen_range(2.0..6.0),
                rng.gen_range(2.0..6.0),
                rng.gen_range(3.0..8.0),
            );
            sample_box(&mut rng, &mut world, c, [w, d, h], spec.points_per_object, SemanticLabel::Building);
        }

        for _ in 0..spec.poles_per_place {
            let c = offset_from(&mut rng, center, 3.0, 12.0);
            let height = rng.gen_range(2.0..5.0);
            for _ in 0..spec.points_per_object {
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                let rr = 0.1;
                world.push(
                    [c[0] + rr * a.cos(), c[1] + rr * a.sin(), rng.gen::<f64>() * height],
                    SemanticLabel::StaticStructure,
                );
            }
        }

        for _ in 0..spec.dynamics_per_place {
            let c = offset_from(&mut rng, center, 2.0, 10.0);
            sample_box(&mut rng, &mut world, c, [4.0, 2.0, 1.5], spec.points_per_object, SemanticLabel::Dynamic);
        }
    }

    let mut frames = Vec::with_capacity(spec.n_places);
    let proto = Scenario {
        spec: *spec,
        place_centers: place_centers.clone(),
        world,
        frames: Vec::new(),
    };
    for center in &place_centers {
        let pose = proto.sensor_pose(*center, [0.0, 0.0], 0.0);
        frames.push((proto.scan_from(&pose), pose));
    }

    Ok(Scenario { frames, ..proto })
}

fn offset_from(rng: &mut ChaCha8Rng, center: Point3, r_min: f64, r_max: f64) -> Point3 {
    let r = rng.gen_range(r_min..r_max);
    let a = rng.gen::<f64>() * std::f64::consts::TAU;
    [center[0] + r * a.cos(), center[1] + r * a.sin(), 0.0]
}

/// Uniform samples on the four walls and roof of an axis-aligned box with
/// base center `c` and size `[w, d, h]`.
fn sample_box(
    rng: &mut ChaCha8Rng,
    world: &mut SemanticPointCloud,
    c: Point3,
    size: [f64; 3],
    count: usize,
    label: SemanticLabel,
) {
    let [w, d, h] = size;
    let areas = [d * h, d * h, w * h, w * h, w * d];
    let total: f64 = areas.iter().sum();
    for _ in 0..count {
        let mut pick = rng.gen::<f64>() * total;
        let mut face = 4;
        for (i, a) in areas.iter().enumerate() {
            if pick < *a {
                face = i;
                break;
            }
            pick -= a;
        }
        let (u, v) = (rng.gen::<f64>(), rng.gen::<f64>());
        let p = match face {
            0 => [c[0] - w / 2.0, c[1] + (u - 0.5) * d, v * h],
            1 => [c[0] + w / 2.0, c[1] + (u - 0.5) * d, v * h],
            2 => [c[0] + (u - 0.5) * w, c[1] - d / 2.0, v * h],
            3 => [c[0] + (u - 0.5) * w, c[1] + d / 2.0, v * h],
            _ => [c[0] + (u - 0.5) * w, c[1] + (v - 0.5) * d, h],
        };
        world.push(p, label);
    }
}
