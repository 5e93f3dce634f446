//! Per-frame orchestration: feature extraction, stereo retention, BoW
//! lookup, retrieval filtering, four-image matching, triangulation with the
//! depth window, and robust PnP producing the final [`LoopDetection`].
//!
//! Every processed frame is added to the database whether or not it yields
//! a detection; rejection is a normal result, not an error.

use std::collections::HashMap;

use image::GrayImage;
use thiserror::Error;

use crate::camera::CameraCalibration;
use crate::config::{ConfigError, PipelineConfig, RansacConfig};
use crate::features::{self, BinaryDescriptor, FeatureError, Keypoint};
use crate::frame::FrameId;
use crate::loopdb::{LoopDatabase, Retrieval};
use crate::pose::Pose;
use crate::stereo::{self, Landmark3D, PnpError};
use crate::vocab::{BowVector, VocabularyTree};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("frame {new} does not advance the sequence past frame {latest}")]
    OutOfOrderFrame { new: u64, latest: u64 },
    #[error("left and right feature lists differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Stereo-retained features of one frame plus its BoW vector. Left and
/// right lists are parallel: index i on the left matches index i on the
/// right, and every entry survived stereo matching.
#[derive(Clone, Debug)]
pub struct StereoObservation {
    pub frame: FrameId,
    pub keypoints_left: Vec<Keypoint>,
    pub keypoints_right: Vec<Keypoint>,
    pub descriptors_left: Vec<BinaryDescriptor>,
    pub descriptors_right: Vec<BinaryDescriptor>,
    pub bow: BowVector,
    /// False when fewer stereo features survived than the configured floor;
    /// such frames are stored but never queried.
    pub queryable: bool,
}

impl StereoObservation {
    /// Assembles an observation from already stereo-matched features, as
    /// produced by the synthetic generator or a feature-level dataset.
    pub fn from_matched_features(
        frame: FrameId,
        keypoints_left: Vec<Keypoint>,
        keypoints_right: Vec<Keypoint>,
        descriptors_left: Vec<BinaryDescriptor>,
        descriptors_right: Vec<BinaryDescriptor>,
        vocabulary: &VocabularyTree,
        floor: usize,
    ) -> Result<Self, PipelineError> {
        let n = keypoints_left.len();
        for other in [
            keypoints_right.len(),
            descriptors_left.len(),
            descriptors_right.len(),
        ] {
            if other != n {
                return Err(PipelineError::LengthMismatch {
                    left: n,
                    right: other,
                });
            }
        }
        let bow = vocabulary.transform(&descriptors_left);
        Ok(Self {
            frame,
            keypoints_left,
            keypoints_right,
            descriptors_left,
            descriptors_right,
            bow,
            queryable: n >= floor,
        })
    }

    pub fn len(&self) -> usize {
        self.keypoints_left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints_left.is_empty()
    }
}

/// A verified loop: query/match pair, metric relative pose and diagnostics.
#[derive(Clone, Debug)]
pub struct LoopDetection {
    pub query: FrameId,
    pub matched: FrameId,
    /// Pose of the query camera expressed in the matched camera frame.
    pub relative_pose: Pose,
    pub inliers: usize,
    /// Normalized similarity of the selected candidate.
    pub eta: f64,
    /// Score H of the winning island.
    pub island_score: f64,
    /// Time interval of the winning island.
    pub island_interval: (f64, f64),
    /// Mutual-best four-image matches before the depth window.
    pub cross_matches: usize,
    /// Correspondences surviving the depth window.
    pub depth_filtered: usize,
}

impl LoopDetection {
    pub const CSV_HEADER: &'static str =
        "query_id,query_ts,match_id,match_ts,tx,ty,tz,qx,qy,qz,qw,inliers,eta,H";

    pub fn csv_row(&self) -> String {
        let t = self.relative_pose.translation();
        let [qx, qy, qz, qw] = self.relative_pose.quaternion_xyzw();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.query.index,
            self.query.timestamp,
            self.matched.index,
            self.matched.timestamp,
            t.x,
            t.y,
            t.z,
            qx,
            qy,
            qz,
            qw,
            self.inliers,
            self.eta,
            self.island_score
        )
    }
}

/// Stage at which a query was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectionStage {
    /// Too few stereo-matched features to query at all.
    TooFewStereoFeatures,
    NoCandidates,
    BelowNormThreshold,
    TemporalInconsistent,
    TooFewCrossMatches,
    TooFewDepthFiltered,
    PnPFailed,
}

impl std::fmt::Display for RejectionStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self {
            RejectionStage::TooFewStereoFeatures => "too_few_stereo_features",
            RejectionStage::NoCandidates => "no_candidates",
            RejectionStage::BelowNormThreshold => "below_norm_threshold",
            RejectionStage::TemporalInconsistent => "temporal_inconsistent",
            RejectionStage::TooFewCrossMatches => "too_few_cross_matches",
            RejectionStage::TooFewDepthFiltered => "too_few_depth_filtered",
            RejectionStage::PnPFailed => "pnp_failed",
        };
        f.write_str(tag)
    }
}

/// Why a query produced no detection, with the count observed at the
/// failing stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RejectionReason {
    pub stage: RejectionStage,
    pub count: usize,
}

impl RejectionReason {
    pub const CSV_HEADER: &'static str = "query_id,query_ts,stage,count";
}

/// Result of processing one frame.
#[derive(Clone, Debug)]
pub enum Outcome {
    Loop(LoopDetection),
    Rejected(RejectionReason),
}

impl Outcome {
    pub fn detection(&self) -> Option<&LoopDetection> {
        match self {
            Outcome::Loop(d) => Some(d),
            Outcome::Rejected(_) => None,
        }
    }

    pub fn rejection(&self) -> Option<&RejectionReason> {
        match self {
            Outcome::Loop(_) => None,
            Outcome::Rejected(r) => Some(r),
        }
    }
}

/// The end-to-end loop detector. Frames must be processed in strictly
/// increasing order; `ingest` is read-only and may overlap the processing
/// of the previous frame.
pub struct LoopPipeline {
    config: PipelineConfig,
    calibration: CameraCalibration,
    vocabulary: VocabularyTree,
    database: LoopDatabase,
    observations: HashMap<u64, StereoObservation>,
    last_frame: Option<FrameId>,
}

impl LoopPipeline {
    pub fn new(
        config: PipelineConfig,
        calibration: CameraCalibration,
        vocabulary: VocabularyTree,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self {
            config,
            calibration,
            vocabulary,
            database: LoopDatabase::new(),
            observations: HashMap::new(),
            last_frame: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn calibration(&self) -> &CameraCalibration {
        &self.calibration
    }

    pub fn database(&self) -> &LoopDatabase {
        &self.database
    }

    pub fn vocabulary(&self) -> &VocabularyTree {
        &self.vocabulary
    }

    /// Detects, describes and stereo-matches one rectified pair, keeping
    /// only features with a stereo partner, and computes the BoW vector
    /// from the retained left descriptors.
    pub fn ingest(
        &self,
        left: &GrayImage,
        right: &GrayImage,
        frame: FrameId,
    ) -> Result<StereoObservation, PipelineError> {
        let kps_left = features::detect(left, self.config.feature_count, &self.config.features)?;
        let kps_right = features::detect(right, self.config.feature_count, &self.config.features)?;
        let descs_left = features::describe(left, &kps_left)?;
        let descs_right = features::describe(right, &kps_right)?;
        let matches = stereo::stereo_match(
            &kps_left,
            &descs_left,
            &kps_right,
            &descs_right,
            &self.config.matching,
        );

        let mut obs = StereoObservation {
            frame,
            keypoints_left: Vec::with_capacity(matches.len()),
            keypoints_right: Vec::with_capacity(matches.len()),
            descriptors_left: Vec::with_capacity(matches.len()),
            descriptors_right: Vec::with_capacity(matches.len()),
            bow: BowVector::empty(),
            queryable: false,
        };
        for m in &matches {
            obs.keypoints_left.push(kps_left[m.left]);
            obs.keypoints_right.push(kps_right[m.right]);
            obs.descriptors_left.push(descs_left[m.left]);
            obs.descriptors_right.push(descs_right[m.right]);
        }
        obs.bow = self.vocabulary.transform(&obs.descriptors_left);
        obs.queryable = obs.len() >= self.config.features_floor();
        Ok(obs)
    }

    /// Runs the retrieval and verification chain for one observation, then
    /// stores the frame in the database regardless of the outcome.
    pub fn process(&mut self, observation: StereoObservation) -> Result<Outcome, PipelineError> {
        if let Some(last) = self.last_frame {
            if observation.frame.index <= last.index
                || observation.frame.timestamp <= last.timestamp
            {
                return Err(PipelineError::OutOfOrderFrame {
                    new: observation.frame.index,
                    latest: last.index,
                });
            }
        }

        let outcome = self.try_detect(&observation);

        self.database
            .add(observation.frame, observation.bow.clone())
            .expect("frame ordering was checked above");
        self.last_frame = Some(observation.frame);
        self.observations
            .insert(observation.frame.index, observation);
        Ok(outcome)
    }

    fn try_detect(&mut self, obs: &StereoObservation) -> Outcome {
        let floor = self.config.features_floor();
        if !obs.queryable {
            return reject(RejectionStage::TooFewStereoFeatures, obs.len());
        }

        let retrieval = self
            .database
            .retrieve(&obs.bow, obs.frame, &self.config);
        let (candidate, island_score, island_interval) = match retrieval {
            Retrieval::NoCandidates { considered } => {
                return reject(RejectionStage::NoCandidates, considered)
            }
            Retrieval::BelowThreshold { below } => {
                return reject(RejectionStage::BelowNormThreshold, below)
            }
            Retrieval::Inconsistent { history_len } => {
                return reject(RejectionStage::TemporalInconsistent, history_len)
            }
            Retrieval::Match {
                candidate,
                island_score,
                island_interval,
            } => (candidate, island_score, island_interval),
        };

        let cand_obs = self
            .observations
            .get(&candidate.frame.index)
            .expect("every stored frame keeps its observation");

        // Four-image consistent matches via mutual-best left-left matching:
        // both frames carry only stereo-surviving keypoints.
        let cross = stereo::cross_match(
            &obs.descriptors_left,
            &cand_obs.descriptors_left,
            self.config.matching.cross_max_hamming,
        );
        if cross.len() < floor {
            return reject(RejectionStage::TooFewCrossMatches, cross.len());
        }

        // Candidate-frame landmarks from its stereo geometry.
        let mut landmarks = Vec::with_capacity(cross.len());
        let mut links = Vec::with_capacity(cross.len());
        for corr in &cross {
            let left = &cand_obs.keypoints_left[corr.candidate];
            let right = &cand_obs.keypoints_right[corr.candidate];
            let disparity = left.u - right.u;
            if let Ok(position) =
                stereo::triangulate_pixel(left.u, left.v, disparity, &self.calibration)
            {
                landmarks.push(Landmark3D {
                    position,
                    source: corr.candidate,
                });
                links.push(*corr);
            }
        }
        let (landmarks, links) = stereo::depth_filter(
            &landmarks,
            &links,
            self.config.depth_min,
            self.config.depth_max,
        )
        .expect("lists are built in parallel");
        if landmarks.len() < floor {
            return reject(RejectionStage::TooFewDepthFiltered, landmarks.len());
        }

        let pixels: Vec<(f64, f64)> = links
            .iter()
            .map(|corr| {
                let kp = &obs.keypoints_left[corr.query];
                (kp.u, kp.v)
            })
            .collect();
        let ransac = RansacConfig {
            seed: derive_seed(self.config.ransac.seed, obs.frame.index),
            ..self.config.ransac
        };
        let result = match stereo::pnp_ransac(&landmarks, &pixels, &self.calibration, &ransac, floor)
        {
            Ok(result) => result,
            Err(PnpError::NoConsensus { best, .. }) => {
                return reject(RejectionStage::PnPFailed, best)
            }
            Err(_) => return reject(RejectionStage::PnPFailed, 0),
        };

        // PnP maps candidate-frame points into the query camera; the
        // reported pose is the query expressed in the candidate frame.
        let relative_pose = result.pose.inverse();
        Outcome::Loop(LoopDetection {
            query: obs.frame,
            matched: candidate.frame,
            relative_pose,
            inliers: result.inliers.len(),
            eta: candidate.normalized,
            island_score,
            island_interval,
            cross_matches: cross.len(),
            depth_filtered: landmarks.len(),
        })
    }
}

fn reject(stage: RejectionStage, count: usize) -> Outcome {
    Outcome::Rejected(RejectionReason { stage, count })
}

/// Splitmix64 mix of the configured seed with the query frame index, so
/// every query gets an independent but reproducible RANSAC stream.
fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
