//! Evaluation machinery: ground-truth trajectories, keyframe selection,
//! detection error metrics and similarity-threshold sweeps.

pub mod dataset;
pub mod synth;

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::pose::Pose;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("timestamp {0} outside ground-truth span [{1}, {2}]")]
    OutOfSpan(f64, f64, f64),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("timestamps not strictly increasing at line {line}")]
    NonMonotonic { line: usize },
}

/// One timestamped pose sample, camera-to-world.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub timestamp: f64,
    pub pose: Pose,
}

/// A time-sorted pose trajectory supporting interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
    /// True when the source carried positions only and orientations were
    /// synthesized from the travel heading.
    orientation_synthesized: bool,
}

impl Trajectory {
    pub fn from_samples(samples: Vec<TrajectorySample>) -> Result<Self, EvalError> {
        if samples.is_empty() {
            return Err(EvalError::EmptyTrajectory);
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(EvalError::NonMonotonic { line: i + 2 });
            }
        }
        Ok(Self {
            samples,
            orientation_synthesized: false,
        })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    /// True for position-only sources whose orientations were synthesized.
    pub fn orientation_synthesized(&self) -> bool {
        self.orientation_synthesized
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.samples.first().unwrap().timestamp,
            self.samples.last().unwrap().timestamp,
        )
    }

    /// Parses `timestamp tx ty tz qx qy qz qw` lines; `#` starts a comment.
    ///
    /// Position-only sources (GPS) may omit the quaternion and provide four
    /// fields per line; orientations are then synthesized from the travel
    /// heading and the trajectory is flagged accordingly.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut samples = Vec::new();
        let mut position_only: Option<bool> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bare = match fields.len() {
                8 => false,
                4 => true,
                n => {
                    return Err(EvalError::Parse {
                        line: line_no,
                        reason: format!("expected 8 (or 4 position-only) fields, got {n}"),
                    })
                }
            };
            if *position_only.get_or_insert(bare) != bare {
                return Err(EvalError::Parse {
                    line: line_no,
                    reason: "mixed 4-field and 8-field lines".into(),
                });
            }
            let mut values = [0.0f64; 8];
            values[7] = 1.0; // identity quaternion for position-only lines
            for (slot, field) in values.iter_mut().zip(fields.iter()) {
                *slot = field.parse().map_err(|e| EvalError::Parse {
                    line: line_no,
                    reason: format!("bad number `{field}`: {e}"),
                })?;
            }
            samples.push(TrajectorySample {
                timestamp: values[0],
                pose: Pose::from_parts(
                    [values[4], values[5], values[6], values[7]],
                    [values[1], values[2], values[3]],
                ),
            });
        }
        let mut trajectory = Self::from_samples(samples)?;
        if position_only == Some(true) {
            trajectory.synthesize_orientations();
        }
        Ok(trajectory)
    }

    /// Replaces every rotation with the forward-camera pose implied by the
    /// local travel direction (heading of the segment leaving each sample,
    /// carried over for the final one).
    fn synthesize_orientations(&mut self) {
        let positions: Vec<Vector3<f64>> =
            self.samples.iter().map(|s| *s.pose.translation()).collect();
        for (i, sample) in self.samples.iter_mut().enumerate() {
            let direction = if i + 1 < positions.len() {
                positions[i + 1] - positions[i]
            } else if i > 0 {
                positions[i] - positions[i - 1]
            } else {
                Vector3::zeros()
            };
            let heading = if direction.x == 0.0 && direction.y == 0.0 {
                0.0
            } else {
                direction.y.atan2(direction.x)
            };
            sample.pose = crate::eval::synth::ground_vehicle_pose(positions[i], heading);
        }
        self.orientation_synthesized = true;
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, EvalError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), EvalError> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# timestamp tx ty tz qx qy qz qw")?;
        for s in &self.samples {
            let t = s.pose.translation();
            let [qx, qy, qz, qw] = s.pose.quaternion_xyzw();
            writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                s.timestamp, t.x, t.y, t.z, qx, qy, qz, qw
            )?;
        }
        Ok(())
    }

    /// Pose at `t`: translation lerp, rotation spherical lerp between the
    /// bracketing samples.
    pub fn interpolate(&self, t: f64) -> Result<Pose, EvalError> {
        let (start, end) = self.span();
        if t < start || t > end {
            return Err(EvalError::OutOfSpan(t, start, end));
        }
        let idx = match self
            .samples
            .binary_search_by(|s| s.timestamp.partial_cmp(&t).unwrap())
        {
            Ok(exact) => return Ok(self.samples[exact].pose),
            Err(insertion) => insertion,
        };
        let before = &self.samples[idx - 1];
        let after = &self.samples[idx];
        let alpha = (t - before.timestamp) / (after.timestamp - before.timestamp);
        let translation =
            before.pose.translation() * (1.0 - alpha) + after.pose.translation() * alpha;
        let rotation = before
            .pose
            .rotation()
            .try_slerp(after.pose.rotation(), alpha, 1e-9)
            .unwrap_or_else(|| {
                if alpha < 0.5 {
                    *before.pose.rotation()
                } else {
                    *after.pose.rotation()
                }
            });
        Ok(Pose::new(rotation, translation))
    }

    /// Ground-truth relative pose `inverse(pose(t_match)) * pose(t_query)`:
    /// the query camera expressed in the match camera frame.
    pub fn relative_pose(&self, t_query: f64, t_match: f64) -> Result<Pose, EvalError> {
        let query = self.interpolate(t_query)?;
        let matched = self.interpolate(t_match)?;
        Ok(matched.inverse().compose(&query))
    }
}

/// Keyframe selection thresholds: a new keyframe after this much travel or
/// rotation, whichever happens first.
#[derive(Clone, Copy, Debug)]
pub struct KeyframeConfig {
    pub translation: f64,
    /// Radians.
    pub rotation: f64,
}

impl Default for KeyframeConfig {
    fn default() -> Self {
        Self {
            translation: 0.5,
            rotation: 10.0_f64.to_radians(),
        }
    }
}

/// Indices of selected keyframes. The first frame is always selected;
/// afterwards a frame is selected when the cumulative translation or
/// rotation since the last keyframe crosses a threshold.
pub fn select_keyframes(
    trajectory: &[TrajectorySample],
    cfg: &KeyframeConfig,
) -> Result<Vec<usize>, EvalError> {
    if trajectory.is_empty() {
        return Err(EvalError::EmptyTrajectory);
    }
    let mut selected = vec![0usize];
    let mut travel = 0.0;
    let mut turned = 0.0;
    for i in 1..trajectory.len() {
        let prev = &trajectory[i - 1];
        let curr = &trajectory[i];
        travel += curr.pose.translation_distance_to(&prev.pose);
        turned += curr.pose.rotation_angle_to(&prev.pose);
        if travel >= cfg.translation || turned >= cfg.rotation {
            selected.push(i);
            travel = 0.0;
            turned = 0.0;
        }
    }
    Ok(selected)
}

/// One detection as read back from a detections CSV.
#[derive(Clone, Copy, Debug)]
pub struct DetectionRecord {
    pub query_id: u64,
    pub query_ts: f64,
    pub match_id: u64,
    pub match_ts: f64,
    pub relative_pose: Pose,
    pub inliers: usize,
    pub eta: f64,
    pub island_score: f64,
}

impl From<&crate::pipeline::LoopDetection> for DetectionRecord {
    fn from(d: &crate::pipeline::LoopDetection) -> Self {
        Self {
            query_id: d.query.index,
            query_ts: d.query.timestamp,
            match_id: d.matched.index,
            match_ts: d.matched.timestamp,
            relative_pose: d.relative_pose,
            inliers: d.inliers,
            eta: d.eta,
            island_score: d.island_score,
        }
    }
}

/// Parses the detection CSV produced by the pipeline.
pub fn parse_detections_csv(text: &str) -> Result<Vec<DetectionRecord>, EvalError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("query_id") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(EvalError::Parse {
                line: line_no,
                reason: format!("expected 14 columns, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64, EvalError> {
            fields[i].trim().parse().map_err(|e| EvalError::Parse {
                line: line_no,
                reason: format!("bad number `{}`: {e}", fields[i]),
            })
        };
        out.push(DetectionRecord {
            query_id: num(0)? as u64,
            query_ts: num(1)?,
            match_id: num(2)? as u64,
            match_ts: num(3)?,
            relative_pose: Pose::from_parts(
                [num(7)?, num(8)?, num(9)?, num(10)?],
                [num(4)?, num(5)?, num(6)?],
            ),
            inliers: num(11)? as usize,
            eta: num(12)?,
            island_score: num(13)?,
        });
    }
    Ok(out)
}

/// Error metrics for one detection against interpolated ground truth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvaluationRecord {
    pub query_id: u64,
    pub match_id: u64,
    pub query_ts: f64,
    pub match_ts: f64,
    pub estimated_translation: [f64; 3],
    pub groundtruth_translation: [f64; 3],
    /// Full vector error |t_est - t_gt| in meters.
    pub translation_error: f64,
    /// Scalar distance error ||t_est| - |t_gt|| in meters.
    pub magnitude_error: f64,
    /// Ground-truth loop distance |t_gt| in meters.
    pub groundtruth_distance: f64,
}

/// Five-number summary plus count; quantiles use linear interpolation.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            count: sorted.len(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Linear-interpolated quantile of an ascending slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Full evaluation output: per-detection records and distribution
/// summaries of both error metrics plus the ground-truth loop distance.
#[derive(Clone, Debug, Serialize)]
pub struct EvaluationReport {
    pub records: Vec<EvaluationRecord>,
    /// Detections whose timestamps fell outside the ground-truth span.
    pub out_of_span: Vec<u64>,
    /// True when ground-truth orientations were synthesized from headings
    /// (position-only source); relative poses then inherit that convention.
    pub orientation_synthesized: bool,
    pub translation_error: SummaryStats,
    pub magnitude_error: SummaryStats,
    pub groundtruth_distance: SummaryStats,
}

/// Scores each detection against the interpolated ground truth. Records
/// outside the span are listed in `out_of_span` rather than failing the
/// whole evaluation.
pub fn evaluate(detections: &[DetectionRecord], groundtruth: &Trajectory) -> EvaluationReport {
    let mut records = Vec::new();
    let mut out_of_span = Vec::new();
    for d in detections {
        let gt = match groundtruth.relative_pose(d.query_ts, d.match_ts) {
            Ok(pose) => pose,
            Err(_) => {
                out_of_span.push(d.query_id);
                continue;
            }
        };
        let est = *d.relative_pose.translation();
        let gt_t = *gt.translation();
        records.push(EvaluationRecord {
            query_id: d.query_id,
            match_id: d.match_id,
            query_ts: d.query_ts,
            match_ts: d.match_ts,
            estimated_translation: [est.x, est.y, est.z],
            groundtruth_translation: [gt_t.x, gt_t.y, gt_t.z],
            translation_error: (est - gt_t).norm(),
            magnitude_error: (est.norm() - gt_t.norm()).abs(),
            groundtruth_distance: gt_t.norm(),
        });
    }
    let collect = |f: fn(&EvaluationRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    EvaluationReport {
        translation_error: SummaryStats::from_values(&collect(|r| r.translation_error)),
        magnitude_error: SummaryStats::from_values(&collect(|r| r.magnitude_error)),
        groundtruth_distance: SummaryStats::from_values(&collect(|r| r.groundtruth_distance)),
        records,
        out_of_span,
        orientation_synthesized: groundtruth.orientation_synthesized(),
    }
}

/// A scored keyframe pair for the threshold sweep.
#[derive(Clone, Copy, Debug)]
pub struct PairScore {
    pub query_ts: f64,
    pub match_ts: f64,
    pub score: f64,
    pub groundtruth_distance: f64,
}

/// Distribution of ground-truth distances among pairs at one threshold.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThresholdBucket {
    pub threshold: f64,
    pub pairs: usize,
    pub distance: SummaryStats,
}

/// For each threshold, the count and distance distribution of pairs whose
/// similarity clears it. Pair counts are monotone non-increasing in the
/// threshold.
pub fn threshold_sweep(pairs: &[PairScore], thresholds: &[f64]) -> Vec<ThresholdBucket> {
    thresholds
        .iter()
        .map(|&threshold| {
            let distances: Vec<f64> = pairs
                .iter()
                .filter(|p| p.score >= threshold)
                .map(|p| p.groundtruth_distance)
                .collect();
            ThresholdBucket {
                threshold,
                pairs: distances.len(),
                distance: SummaryStats::from_values(&distances),
            }
        })
        .collect()
}

/// Heading difference helper for revisit analysis: angle between the
/// forward (optical) axes of two camera-to-world poses.
pub fn forward_axis_angle(a: &Pose, b: &Pose) -> f64 {
    let fa = a.rotation() * Vector3::z();
    let fb = b.rotation() * Vector3::z();
    fa.dot(&fb).clamp(-1.0, 1.0).acos()
}
