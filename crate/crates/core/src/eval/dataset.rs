//! Neutral on-disk dataset layout and the end-to-end runners behind the
//! CLI.
//!
//! A dataset directory holds:
//! - `times.txt`: `frame_id timestamp` per line, `#` comments
//! - `calibration.txt`: `key = value` pairs (focal, cx, cy, baseline,
//!   width, height)
//! - `groundtruth.txt`: `timestamp tx ty tz qx qy qz qw` per line (optional
//!   for detection, required for evaluation and sweeps)
//! - either `left/` and `right/` image folders (PGM/PNG, sorted by name)
//!   or `observations.bin`, a feature-level dump produced by the synthetic
//!   generator.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::camera::{CameraCalibration, CameraError};
use crate::config::PipelineConfig;
use crate::eval::synth::SyntheticDataset;
use crate::eval::{
    select_keyframes, EvalError, KeyframeConfig, PairScore, Trajectory, TrajectorySample,
};
use crate::features::{self, BinaryDescriptor, FeatureError, Keypoint};
use crate::frame::FrameId;
use crate::loopdb::DatabaseError;
use crate::pipeline::{LoopDetection, LoopPipeline, Outcome, PipelineError, StereoObservation};
use crate::vocab::{VocabIoError, VocabularyTree};

const OBSERVATIONS_MAGIC: &[u8; 6] = b"SLOBS1";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset at {0}: {1}")]
    Layout(PathBuf, String),
    #[error("calibration: {0}")]
    Calibration(#[from] CameraError),
    #[error("line {line} of {file}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Vocab(#[from] VocabIoError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Database(#[from] DatabaseError),
    #[error("observation file truncated")]
    Truncated,
    #[error("bad observations magic")]
    BadMagic,
}

/// Feature-level content of one frame (both views, parallel lists).
#[derive(Clone, Debug)]
pub struct FeatureFrame {
    pub frame: FrameId,
    pub keypoints_left: Vec<Keypoint>,
    pub keypoints_right: Vec<Keypoint>,
    pub descriptors_left: Vec<BinaryDescriptor>,
    pub descriptors_right: Vec<BinaryDescriptor>,
}

/// How frame content is stored on disk.
pub enum FrameSource {
    /// Pixel rasters to run the detector on.
    Images { left: Vec<PathBuf>, right: Vec<PathBuf> },
    /// Pre-extracted stereo-matched features.
    Features(Vec<FeatureFrame>),
}

/// An opened dataset directory.
pub struct DatasetLayout {
    pub root: PathBuf,
    pub times: Vec<FrameId>,
    pub calibration: CameraCalibration,
    pub groundtruth: Option<Trajectory>,
    pub source: FrameSource,
}

impl DatasetLayout {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let root = root.as_ref().to_path_buf();
        let times = read_times(&root.join("times.txt"))?;
        let calibration = read_calibration(&root.join("calibration.txt"))?;
        let gt_path = root.join("groundtruth.txt");
        let groundtruth = if gt_path.exists() {
            Some(Trajectory::load(&gt_path)?)
        } else {
            None
        };

        let observations = root.join("observations.bin");
        let source = if observations.exists() {
            let frames = read_observations(&observations)?;
            if frames.len() != times.len() {
                return Err(DatasetError::Layout(
                    root,
                    format!(
                        "{} observation frames but {} time entries",
                        frames.len(),
                        times.len()
                    ),
                ));
            }
            FrameSource::Features(frames)
        } else {
            let left = list_images(&root.join("left"))?;
            let right = list_images(&root.join("right"))?;
            if left.len() != right.len() {
                return Err(DatasetError::Layout(
                    root,
                    format!("{} left images but {} right images", left.len(), right.len()),
                ));
            }
            if left.len() != times.len() {
                return Err(DatasetError::Layout(
                    root,
                    format!("{} image pairs but {} time entries", left.len(), times.len()),
                ));
            }
            FrameSource::Images { left, right }
        };

        if let Some(gt) = &groundtruth {
            let (start, end) = gt.span();
            for id in &times {
                if id.timestamp < start || id.timestamp > end {
                    return Err(DatasetError::Layout(
                        root,
                        format!(
                            "frame {} at {} outside ground-truth span [{start}, {end}]",
                            id.index, id.timestamp
                        ),
                    ));
                }
            }
        }

        Ok(Self {
            root,
            times,
            calibration,
            groundtruth,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes a synthetic dataset as a complete directory.
    pub fn write_synthetic(
        dir: impl AsRef<Path>,
        dataset: &SyntheticDataset,
    ) -> Result<(), DatasetError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_times(
            &dir.join("times.txt"),
            dataset.frames.iter().map(|f| f.frame),
        )?;
        write_calibration(&dir.join("calibration.txt"), &dataset.calibration)?;
        dataset.groundtruth.save(dir.join("groundtruth.txt"))?;
        write_observations(&dir.join("observations.bin"), &dataset.frames)?;
        Ok(())
    }
}

fn read_times(path: &Path) -> Result<Vec<FrameId>, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_err = |reason: String| DatasetError::Parse {
            file: "times.txt".into(),
            line: idx + 1,
            reason,
        };
        let index: u64 = fields
            .next()
            .ok_or_else(|| parse_err("missing frame id".into()))?
            .parse()
            .map_err(|e| parse_err(format!("bad frame id: {e}")))?;
        let timestamp: f64 = fields
            .next()
            .ok_or_else(|| parse_err("missing timestamp".into()))?
            .parse()
            .map_err(|e| parse_err(format!("bad timestamp: {e}")))?;
        out.push(FrameId::new(index, timestamp));
    }
    if out.is_empty() {
        return Err(DatasetError::Parse {
            file: "times.txt".into(),
            line: 0,
            reason: "no frames listed".into(),
        });
    }
    Ok(out)
}

fn write_times(path: &Path, times: impl Iterator<Item = FrameId>) -> Result<(), DatasetError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# frame_id timestamp")?;
    for id in times {
        writeln!(out, "{} {}", id.index, id.timestamp)?;
    }
    Ok(())
}

fn read_calibration(path: &Path) -> Result<CameraCalibration, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    let mut focal = None;
    let mut cx = None;
    let mut cy = None;
    let mut baseline = None;
    let mut width = None;
    let mut height = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| DatasetError::Parse {
            file: "calibration.txt".into(),
            line: idx + 1,
            reason,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err("expected `key = value`".into()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad number: {e}")))?;
        match key.trim() {
            "focal" => focal = Some(value),
            "cx" => cx = Some(value),
            "cy" => cy = Some(value),
            "baseline" => baseline = Some(value),
            "width" => width = Some(value),
            "height" => height = Some(value),
            other => return Err(parse_err(format!("unknown key `{other}`"))),
        }
    }
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| DatasetError::Parse {
            file: "calibration.txt".into(),
            line: 0,
            reason: format!("missing key `{name}`"),
        })
    };
    Ok(CameraCalibration::new(
        need("focal", focal)?,
        need("cx", cx)?,
        need("cy", cy)?,
        need("baseline", baseline)?,
        need("width", width)? as u32,
        need("height", height)? as u32,
    )?)
}

fn write_calibration(path: &Path, cal: &CameraCalibration) -> Result<(), DatasetError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let (cx, cy) = cal.principal_point();
    writeln!(out, "focal = {}", cal.focal())?;
    writeln!(out, "cx = {cx}")?;
    writeln!(out, "cy = {cy}")?;
    writeln!(out, "baseline = {}", cal.baseline())?;
    writeln!(out, "width = {}", cal.width())?;
    writeln!(out, "height = {}", cal.height())?;
    Ok(())
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        if ext == "pgm" || ext == "png" {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn write_observations(path: &Path, frames: &[FeatureFrame]) -> Result<(), DatasetError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(OBSERVATIONS_MAGIC)?;
    out.write_all(&(frames.len() as u64).to_le_bytes())?;
    for frame in frames {
        out.write_all(&frame.frame.index.to_le_bytes())?;
        out.write_all(&frame.frame.timestamp.to_le_bytes())?;
        out.write_all(&(frame.keypoints_left.len() as u32).to_le_bytes())?;
        for i in 0..frame.keypoints_left.len() {
            let l = &frame.keypoints_left[i];
            let r = &frame.keypoints_right[i];
            for value in [l.u, l.v, r.u, r.v] {
                out.write_all(&value.to_le_bytes())?;
            }
            out.write_all(&frame.descriptors_left[i].to_bytes())?;
            out.write_all(&frame.descriptors_right[i].to_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_observations(path: &Path) -> Result<Vec<FeatureFrame>, DatasetError> {
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    let read_exact = |input: &mut std::io::BufReader<std::fs::File>,
                      buf: &mut [u8]|
     -> Result<(), DatasetError> {
        input.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                DatasetError::Truncated
            } else {
                DatasetError::Io(e)
            }
        })
    };

    let mut magic = [0u8; 6];
    read_exact(&mut input, &mut magic)?;
    if &magic != OBSERVATIONS_MAGIC {
        return Err(DatasetError::BadMagic);
    }
    let mut count_buf = [0u8; 8];
    read_exact(&mut input, &mut count_buf)?;
    let count = u64::from_le_bytes(count_buf) as usize;

    let keypoint = |u: f64, v: f64| Keypoint {
        u,
        v,
        response: 1.0,
        angle: 0.0,
        octave: 0,
    };
    let mut frames = Vec::with_capacity(count);
    for _ in 0..count {
        let mut idx_buf = [0u8; 8];
        read_exact(&mut input, &mut idx_buf)?;
        let index = u64::from_le_bytes(idx_buf);
        let mut ts_buf = [0u8; 8];
        read_exact(&mut input, &mut ts_buf)?;
        let timestamp = f64::from_le_bytes(ts_buf);
        let mut n_buf = [0u8; 4];
        read_exact(&mut input, &mut n_buf)?;
        let n = u32::from_le_bytes(n_buf) as usize;

        let mut frame = FeatureFrame {
            frame: FrameId::new(index, timestamp),
            keypoints_left: Vec::with_capacity(n),
            keypoints_right: Vec::with_capacity(n),
            descriptors_left: Vec::with_capacity(n),
            descriptors_right: Vec::with_capacity(n),
        };
        for _ in 0..n {
            let mut values = [0.0f64; 4];
            for value in values.iter_mut() {
                let mut buf = [0u8; 8];
                read_exact(&mut input, &mut buf)?;
                *value = f64::from_le_bytes(buf);
            }
            let mut dl = [0u8; 32];
            read_exact(&mut input, &mut dl)?;
            let mut dr = [0u8; 32];
            read_exact(&mut input, &mut dr)?;
            frame.keypoints_left.push(keypoint(values[0], values[1]));
            frame.keypoints_right.push(keypoint(values[2], values[3]));
            frame
                .descriptors_left
                .push(BinaryDescriptor::from_bytes(&dl));
            frame
                .descriptors_right
                .push(BinaryDescriptor::from_bytes(&dr));
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Builds the pipeline observation for frame `index` of a dataset.
fn observation_for(
    layout: &DatasetLayout,
    pipeline: &LoopPipeline,
    index: usize,
) -> Result<StereoObservation, DatasetError> {
    let frame = layout.times[index];
    match &layout.source {
        FrameSource::Images { left, right } => {
            let left_img = features::load_gray(&left[index])?;
            let right_img = features::load_gray(&right[index])?;
            Ok(pipeline.ingest(&left_img, &right_img, frame)?)
        }
        FrameSource::Features(frames) => {
            let f = &frames[index];
            Ok(StereoObservation::from_matched_features(
                frame,
                f.keypoints_left.clone(),
                f.keypoints_right.clone(),
                f.descriptors_left.clone(),
                f.descriptors_right.clone(),
                pipeline.vocabulary(),
                pipeline.config().features_floor(),
            )?)
        }
    }
}

/// Summary of a detection run.
#[derive(Clone, Debug, Default)]
pub struct DetectSummary {
    pub frames: usize,
    pub detections: usize,
    pub rejections: usize,
}

/// Runs the full detector over a dataset, writing one CSV row per
/// detection and, optionally, one per rejection. Output is byte-for-byte
/// deterministic for a fixed dataset, config and seed.
pub fn run_detect(
    dataset_root: impl AsRef<Path>,
    vocab_path: impl AsRef<Path>,
    config: &PipelineConfig,
    detections_out: impl AsRef<Path>,
    rejections_out: Option<&Path>,
) -> Result<DetectSummary, DatasetError> {
    let layout = DatasetLayout::open(dataset_root)?;
    let vocabulary = VocabularyTree::load(vocab_path)?;
    let mut pipeline = LoopPipeline::new(*config, layout.calibration, vocabulary)?;

    let mut detections_file = std::io::BufWriter::new(std::fs::File::create(detections_out)?);
    writeln!(detections_file, "{}", LoopDetection::CSV_HEADER)?;
    let mut rejections_file = match rejections_out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(f, "{}", crate::pipeline::RejectionReason::CSV_HEADER)?;
            Some(f)
        }
        None => None,
    };

    let mut summary = DetectSummary::default();
    for index in 0..layout.len() {
        let obs = observation_for(&layout, &pipeline, index)?;
        let frame = obs.frame;
        match pipeline.process(obs)? {
            Outcome::Loop(detection) => {
                summary.detections += 1;
                writeln!(detections_file, "{}", detection.csv_row())?;
            }
            Outcome::Rejected(reason) => {
                summary.rejections += 1;
                if let Some(f) = rejections_file.as_mut() {
                    writeln!(
                        f,
                        "{},{},{},{}",
                        frame.index, frame.timestamp, reason.stage, reason.count
                    )?;
                }
            }
        }
        summary.frames += 1;
    }
    detections_file.flush()?;
    if let Some(mut f) = rejections_file {
        f.flush()?;
    }
    Ok(summary)
}

/// Harvests descriptors for vocabulary training: all left descriptors of a
/// feature-level dataset, or detector output on every left image.
pub fn harvest_descriptors(
    dataset_root: impl AsRef<Path>,
    config: &PipelineConfig,
) -> Result<Vec<BinaryDescriptor>, DatasetError> {
    let layout = DatasetLayout::open(dataset_root)?;
    let mut out = Vec::new();
    match &layout.source {
        FrameSource::Features(frames) => {
            for frame in frames {
                out.extend_from_slice(&frame.descriptors_left);
            }
        }
        FrameSource::Images { left, .. } => {
            for path in left {
                let img = features::load_gray(path)?;
                let kps = features::detect(&img, config.feature_count, &config.features)?;
                out.extend(features::describe(&img, &kps)?);
            }
        }
    }
    Ok(out)
}

/// Pairwise similarity sweep over keyframes (selected on the ground-truth
/// trajectory), excluding pairs inside the temporal exclusion window.
pub fn run_sweep(
    dataset_root: impl AsRef<Path>,
    vocab_path: impl AsRef<Path>,
    config: &PipelineConfig,
    keyframes: &KeyframeConfig,
) -> Result<Vec<PairScore>, DatasetError> {
    let layout = DatasetLayout::open(&dataset_root)?;
    let groundtruth = layout.groundtruth.as_ref().ok_or_else(|| {
        DatasetError::Layout(
            layout.root.clone(),
            "sweep requires groundtruth.txt".into(),
        )
    })?;
    let vocabulary = VocabularyTree::load(vocab_path)?;
    let pipeline = LoopPipeline::new(*config, layout.calibration, vocabulary)?;

    // Ground-truth poses at frame timestamps drive keyframe selection.
    let samples: Vec<TrajectorySample> = layout
        .times
        .iter()
        .map(|id| {
            Ok(TrajectorySample {
                timestamp: id.timestamp,
                pose: groundtruth.interpolate(id.timestamp)?,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    let selected = select_keyframes(&samples, keyframes)?;

    let mut vectors = Vec::with_capacity(selected.len());
    for &index in &selected {
        let obs = observation_for(&layout, &pipeline, index)?;
        vectors.push((samples[index], obs.bow));
    }

    let mut pairs = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let (si, vi) = &vectors[i];
            let (sj, vj) = &vectors[j];
            if (sj.timestamp - si.timestamp).abs() < config.temporal_exclusion {
                continue;
            }
            pairs.push(PairScore {
                query_ts: sj.timestamp,
                match_ts: si.timestamp,
                score: crate::vocab::score_overlap(vj, vi),
                groundtruth_distance: sj.pose.translation_distance_to(&si.pose),
            });
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synth::{generate_synthetic, NoiseConfig, SynthConfig, WorldConfig};

    fn tiny_dataset() -> SyntheticDataset {
        let cfg = SynthConfig {
            world: WorldConfig {
                landmark_count: 300,
                ..WorldConfig::default()
            },
            trajectory: crate::eval::synth::TrajectoryConfig {
                scale: 10.0,
                ..Default::default()
            },
            noise: NoiseConfig {
                sigma_px: 0.0,
                p_bit: 0.0,
            },
            ..SynthConfig::default()
        };
        generate_synthetic(&cfg, 17).unwrap()
    }

    #[test]
    fn synthetic_dataset_round_trips_through_disk() {
        let data = tiny_dataset();
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("synth");
        DatasetLayout::write_synthetic(&root, &data).unwrap();

        let layout = DatasetLayout::open(&root).unwrap();
        assert_eq!(layout.len(), data.frames.len());
        assert_eq!(layout.calibration, data.calibration);
        assert!(layout.groundtruth.is_some());
        match &layout.source {
            FrameSource::Features(frames) => {
                for (disk, mem) in frames.iter().zip(data.frames.iter()) {
                    assert_eq!(disk.frame, mem.frame);
                    assert_eq!(disk.descriptors_left, mem.descriptors_left);
                    assert_eq!(disk.keypoints_left.len(), mem.keypoints_left.len());
                    for (a, b) in disk.keypoints_left.iter().zip(mem.keypoints_left.iter()) {
                        assert_eq!((a.u, a.v), (b.u, b.v));
                    }
                }
            }
            FrameSource::Images { .. } => panic!("expected feature source"),
        }
    }

    #[test]
    fn corrupt_observation_files_are_rejected() {
        let data = tiny_dataset();
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("synth");
        DatasetLayout::write_synthetic(&root, &data).unwrap();

        let obs = root.join("observations.bin");
        let bytes = std::fs::read(&obs).unwrap();
        std::fs::write(&obs, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(
            DatasetLayout::open(&root),
            Err(DatasetError::Truncated)
        ));

        std::fs::write(&obs, b"WRONGMAGICxxxxxxxxxxxx").unwrap();
        assert!(matches!(
            DatasetLayout::open(&root),
            Err(DatasetError::BadMagic)
        ));
    }

    #[test]
    fn missing_pieces_fail_loudly() {
        let data = tiny_dataset();
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("synth");
        DatasetLayout::write_synthetic(&root, &data).unwrap();
        std::fs::remove_file(root.join("times.txt")).unwrap();
        assert!(DatasetLayout::open(&root).is_err());
    }

    #[test]
    fn image_folder_datasets_run_through_the_detector() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};

        let mut rng = StdRng::seed_from_u64(70);
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("imgset");
        std::fs::create_dir_all(root.join("left")).unwrap();
        std::fs::create_dir_all(root.join("right")).unwrap();

        // Three noise-textured pairs, right image shifted 6 px so stereo
        // matching finds positive disparity.
        for i in 0..3 {
            let left =
                image::GrayImage::from_fn(320, 240, |_, _| image::Luma([rng.random()]));
            let mut right = image::GrayImage::new(320, 240);
            for y in 0..240 {
                for x in 0..320 {
                    right.put_pixel(x, y, *left.get_pixel((x + 6).min(319), y));
                }
            }
            left.save(root.join(format!("left/{i:04}.png"))).unwrap();
            right.save(root.join(format!("right/{i:04}.pgm"))).unwrap();
        }
        std::fs::write(root.join("times.txt"), "0 0.0\n1 0.5\n2 1.0\n").unwrap();
        let cal = CameraCalibration::new(230.0, 160.0, 120.0, 0.1, 320, 240).unwrap();
        write_calibration(&root.join("calibration.txt"), &cal).unwrap();

        let layout = DatasetLayout::open(&root).unwrap();
        assert!(matches!(layout.source, FrameSource::Images { .. }));

        // A tiny vocabulary suffices; no loops expected in 3 frames.
        let corpus: Vec<BinaryDescriptor> = (0..100)
            .map(|_| BinaryDescriptor([rng.random(), rng.random(), rng.random(), rng.random()]))
            .collect();
        let vocab = VocabularyTree::train(&corpus, 2, 2, 1).unwrap();
        let vocab_path = dir.path().join("v.voc");
        vocab.save(&vocab_path).unwrap();

        let cfg = PipelineConfig {
            feature_count: 300,
            ..PipelineConfig::default()
        };
        let out = dir.path().join("detections.csv");
        let summary = run_detect(&root, &vocab_path, &cfg, &out, None).unwrap();
        assert_eq!(summary.frames, 3);
        assert_eq!(summary.detections, 0);
        assert_eq!(summary.rejections, 3);
    }

    #[test]
    fn calibration_file_round_trips_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calibration.txt");
        let cal = CameraCalibration::new(460.0, 320.5, 240.25, 0.21, 640, 480).unwrap();
        write_calibration(&path, &cal).unwrap();
        assert_eq!(read_calibration(&path).unwrap(), cal);

        std::fs::write(&path, "focal = 100\nfocus = 3\n").unwrap();
        assert!(matches!(
            read_calibration(&path),
            Err(DatasetError::Parse { .. })
        ));
    }
}
