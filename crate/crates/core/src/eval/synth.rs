//! Synthetic stereo sequences for desk-scale experiments: a random 3D
//! landmark field with ground-truth 256-bit descriptors, a scripted
//! trajectory with revisits, and feature-level observations produced by
//! projecting visible landmarks into both cameras and perturbing pixels
//! and descriptor bits. The pixel-level detector is bypassed entirely.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::camera::CameraCalibration;
use crate::eval::dataset::FeatureFrame;
use crate::eval::{Trajectory, TrajectorySample};
use crate::features::{BinaryDescriptor, Keypoint};
use crate::frame::FrameId;
use crate::pose::Pose;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no landmarks visible in {empty} of {total} frames (>= 10%)")]
    InfeasibleTrajectory { empty: usize, total: usize },
    #[error("unknown scenario `{0}` (expected loop, figure-eight or out-and-back)")]
    UnknownScenario(String),
}

/// Scripted trajectory shapes. Every scenario revisits earlier poses with
/// the same heading after more than one exclusion window of travel time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// A circle traversed for `laps` laps.
    Loop,
    /// A Gerono lemniscate traversed for `laps` laps.
    FigureEight,
    /// Out along a straight lane, U-turn, back along a parallel lane,
    /// U-turn at the start, then out along the first lane again.
    OutAndBack,
}

impl std::str::FromStr for Scenario {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "loop" => Ok(Scenario::Loop),
            "figure-eight" | "figure8" | "eight" => Ok(Scenario::FigureEight),
            "out-and-back" | "outandback" | "oab" => Ok(Scenario::OutAndBack),
            other => Err(SynthError::UnknownScenario(other.to_string())),
        }
    }
}

/// Landmark field parameters. Landmarks fill the trajectory bounding box
/// expanded by `margin`, between `height_range` altitudes.
#[derive(Clone, Copy, Debug)]
pub struct WorldConfig {
    pub landmark_count: usize,
    pub margin: f64,
    pub height_range: (f64, f64),
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            landmark_count: 900,
            margin: 10.0,
            height_range: (0.0, 4.0),
        }
    }
}

/// Trajectory shape parameters. `spacing` is the arc length between
/// emitted frames (keyframe granularity).
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryConfig {
    pub scenario: Scenario,
    /// Straight-lane length for out-and-back, circle/lemniscate radius
    /// otherwise (meters).
    pub scale: f64,
    /// U-turn radius for out-and-back (meters).
    pub turn_radius: f64,
    pub laps: f64,
    /// Travel speed, meters per second; timestamps follow arc length.
    pub speed: f64,
    /// Arc length between emitted frames (meters).
    pub spacing: f64,
    /// Camera height above the ground plane (meters).
    pub camera_height: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::OutAndBack,
            scale: 60.0,
            turn_radius: 2.0,
            laps: 2.0,
            speed: 1.0,
            spacing: 0.5,
            camera_height: 1.5,
        }
    }
}

/// Observation noise: Gaussian pixel jitter and i.i.d. descriptor bit
/// flips, applied independently to the left and right views.
#[derive(Clone, Copy, Debug)]
pub struct NoiseConfig {
    pub sigma_px: f64,
    pub p_bit: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_px: 1.0,
            p_bit: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SynthConfig {
    pub world: WorldConfig,
    pub trajectory: TrajectoryConfig,
    pub noise: NoiseConfig,
    pub calibration: CameraCalibration,
    /// Landmarks are emitted only in this depth window (meters); keep it
    /// inside the pipeline's window so noisy disparities stay valid.
    pub visible_depth: (f64, f64),
    /// When set, each frame is padded to exactly this many features with
    /// per-frame random clutter (unstable descriptors that never rematch),
    /// mirroring a detector forced to output a fixed keypoint budget.
    pub target_features: Option<usize>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            trajectory: TrajectoryConfig::default(),
            noise: NoiseConfig::default(),
            calibration: CameraCalibration::new(460.0, 320.0, 240.0, 0.2, 640, 480)
                .expect("default calibration is valid"),
            visible_depth: (0.6, 11.5),
            target_features: None,
        }
    }
}

/// A generated dataset: feature-level observations plus exact ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub frames: Vec<FeatureFrame>,
    pub groundtruth: Trajectory,
    pub calibration: CameraCalibration,
}

/// Camera-to-world pose for a ground vehicle at `position` heading `phi`:
/// optical axis along the heading, image x to the right, image y down.
pub fn ground_vehicle_pose(position: Vector3<f64>, heading: f64) -> Pose {
    let forward = Vector3::new(heading.cos(), heading.sin(), 0.0);
    let down = Vector3::new(0.0, 0.0, -1.0);
    let right = down.cross(&forward);
    let rotation = Matrix3::from_columns(&[right, down, forward]);
    Pose::new(UnitQuaternion::from_matrix(&rotation), position)
}

/// (position, heading) along the scenario path at arc length `s`.
fn path_point(cfg: &TrajectoryConfig, s: f64) -> (f64, f64, f64) {
    match cfg.scenario {
        Scenario::Loop => {
            let theta = s / cfg.scale;
            (
                cfg.scale * theta.sin(),
                cfg.scale * (1.0 - theta.cos()),
                theta,
            )
        }
        Scenario::FigureEight => {
            // Gerono lemniscate, walked by a fine parameter grid elsewhere;
            // here s is treated as the parameter scaled to arc-ish length.
            let tau = s / cfg.scale;
            let x = cfg.scale * tau.sin();
            let y = 0.5 * cfg.scale * (2.0 * tau).sin();
            let dx = tau.cos();
            let dy = (2.0 * tau).cos();
            (x, y, dy.atan2(dx))
        }
        Scenario::OutAndBack => {
            let lane = cfg.scale;
            let r = cfg.turn_radius;
            let turn = std::f64::consts::PI * r;
            let circuit = 2.0 * lane + 2.0 * turn;
            let within = s % circuit;
            if within < lane {
                (within, 0.0, 0.0)
            } else if within < lane + turn {
                let phi = (within - lane) / r;
                (lane + r * phi.sin(), r * (1.0 - phi.cos()), phi)
            } else if within < 2.0 * lane + turn {
                let along = within - lane - turn;
                (lane - along, 2.0 * r, std::f64::consts::PI)
            } else {
                let phi = (within - 2.0 * lane - turn) / r;
                (
                    -r * phi.sin(),
                    r + r * phi.cos(),
                    std::f64::consts::PI + phi,
                )
            }
        }
    }
}

/// Total path parameter for the configured number of laps.
fn path_length(cfg: &TrajectoryConfig) -> f64 {
    match cfg.scenario {
        Scenario::Loop => cfg.scale * 2.0 * std::f64::consts::PI * cfg.laps,
        Scenario::FigureEight => cfg.scale * 2.0 * std::f64::consts::PI * cfg.laps,
        Scenario::OutAndBack => {
            let circuit = 2.0 * cfg.scale + 2.0 * std::f64::consts::PI * cfg.turn_radius;
            // `laps` circuits plus one extra outbound lane so the final leg
            // revisits the first one.
            (cfg.laps - 1.0).max(0.0) * circuit + circuit + cfg.scale
        }
    }
}

/// Generates a deterministic synthetic dataset for the given seed.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<SyntheticDataset, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let traj_cfg = &cfg.trajectory;
    let cal = &cfg.calibration;

    // Frame poses at keyframe spacing along the path. Figure-eight is not
    // arc-parameterized, so walk a fine grid and emit on accumulated chord
    // length; the two arc-parameterized scenarios pass through unchanged.
    let total = path_length(traj_cfg);
    let mut poses: Vec<TrajectorySample> = Vec::new();
    let fine = traj_cfg.spacing / 64.0;
    let mut accumulated = 0.0;
    let mut since_emit = f64::INFINITY; // emit the first point immediately
    let mut previous: Option<(f64, f64)> = None;
    let mut s = 0.0;
    while s <= total {
        let (x, y, heading) = path_point(traj_cfg, s);
        if let Some((px, py)) = previous {
            let chord = ((x - px).powi(2) + (y - py).powi(2)).sqrt();
            accumulated += chord;
            since_emit += chord;
        }
        if since_emit >= traj_cfg.spacing {
            poses.push(TrajectorySample {
                timestamp: accumulated / traj_cfg.speed,
                pose: ground_vehicle_pose(
                    Vector3::new(x, y, traj_cfg.camera_height),
                    heading,
                ),
            });
            since_emit = 0.0;
        }
        previous = Some((x, y));
        s += fine;
    }

    // Landmark field over the trajectory bounding box.
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &poses {
        min_x = min_x.min(p.pose.translation().x);
        max_x = max_x.max(p.pose.translation().x);
        min_y = min_y.min(p.pose.translation().y);
        max_y = max_y.max(p.pose.translation().y);
    }
    let m = cfg.world.margin;
    let landmarks: Vec<Vector3<f64>> = (0..cfg.world.landmark_count)
        .map(|_| {
            Vector3::new(
                rng.random_range(min_x - m..max_x + m),
                rng.random_range(min_y - m..max_y + m),
                rng.random_range(cfg.world.height_range.0..cfg.world.height_range.1),
            )
        })
        .collect();
    // One signature per compass sector of the viewing direction: appearance
    // changes with viewpoint, so opposite-direction passes do not match.
    let signatures: Vec<[BinaryDescriptor; 4]> = (0..cfg.world.landmark_count)
        .map(|_| {
            std::array::from_fn(|_| {
                BinaryDescriptor([rng.random(), rng.random(), rng.random(), rng.random()])
            })
        })
        .collect();

    let keypoint = |u: f64, v: f64| Keypoint {
        u,
        v,
        response: 1.0,
        angle: 0.0,
        octave: 0,
    };

    let mut frames = Vec::with_capacity(poses.len());
    let mut empty_frames = 0usize;
    for (index, sample) in poses.iter().enumerate() {
        let world_to_cam = sample.pose.inverse();
        let forward = sample.pose.rotation() * Vector3::z();
        let heading = forward.y.atan2(forward.x);
        let sector = ((heading / std::f64::consts::FRAC_PI_2).round() as i64).rem_euclid(4) as usize;
        let mut frame = FeatureFrame {
            frame: FrameId::new(index as u64, sample.timestamp),
            keypoints_left: Vec::new(),
            keypoints_right: Vec::new(),
            descriptors_left: Vec::new(),
            descriptors_right: Vec::new(),
        };
        let budget = cfg.target_features.unwrap_or(usize::MAX);
        for (landmark, signature) in landmarks.iter().zip(signatures.iter()) {
            if frame.keypoints_left.len() >= budget {
                break;
            }
            let in_cam = world_to_cam.transform_point(landmark);
            if in_cam.z < cfg.visible_depth.0 || in_cam.z > cfg.visible_depth.1 {
                continue;
            }
            let Ok((ul, vl)) = cal.project(&in_cam) else {
                continue;
            };
            let disparity = cal.focal() * cal.baseline() / in_cam.z;
            let (ur, vr) = (ul - disparity, vl);
            if !cal.contains_pixel(ul, vl) || !cal.contains_pixel(ur, vr) {
                continue;
            }
            let jitter =
                |rng: &mut ChaCha8Rng| cfg.noise.sigma_px * rng.sample::<f64, _>(StandardNormal);
            frame
                .keypoints_left
                .push(keypoint(ul + jitter(&mut rng), vl + jitter(&mut rng)));
            frame
                .keypoints_right
                .push(keypoint(ur + jitter(&mut rng), vr + jitter(&mut rng)));
            frame
                .descriptors_left
                .push(flip_bits(signature[sector], cfg.noise.p_bit, &mut rng));
            frame
                .descriptors_right
                .push(flip_bits(signature[sector], cfg.noise.p_bit, &mut rng));
        }
        if frame.keypoints_left.is_empty() {
            empty_frames += 1;
        }
        // Pad with per-frame clutter up to the feature budget.
        if let Some(target) = cfg.target_features {
            while frame.keypoints_left.len() < target {
                let u = rng.random_range(0.0..cal.width() as f64);
                let v = rng.random_range(0.0..cal.height() as f64);
                let depth = rng.random_range(cfg.visible_depth.0..cfg.visible_depth.1);
                let disparity = cal.focal() * cal.baseline() / depth;
                frame.keypoints_left.push(keypoint(u, v));
                frame.keypoints_right.push(keypoint(u - disparity, v));
                let clutter =
                    BinaryDescriptor([rng.random(), rng.random(), rng.random(), rng.random()]);
                frame.descriptors_left.push(clutter);
                frame
                    .descriptors_right
                    .push(flip_bits(clutter, cfg.noise.p_bit, &mut rng));
            }
        }
        frames.push(frame);
    }

    if empty_frames * 10 >= poses.len() {
        return Err(SynthError::InfeasibleTrajectory {
            empty: empty_frames,
            total: poses.len(),
        });
    }

    let groundtruth = Trajectory::from_samples(poses).expect("poses are time-ordered");
    Ok(SyntheticDataset {
        frames,
        groundtruth,
        calibration: *cal,
    })
}

fn flip_bits(mut descriptor: BinaryDescriptor, p_bit: f64, rng: &mut ChaCha8Rng) -> BinaryDescriptor {
    if p_bit <= 0.0 {
        return descriptor;
    }
    for bit in 0..BinaryDescriptor::BITS {
        if rng.random::<f64>() < p_bit {
            descriptor.flip_bit(bit);
        }
    }
    descriptor
}
