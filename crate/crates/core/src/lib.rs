//! Stereo loop detection for sequential imagery.
//!
//! The pipeline retrieves loop candidates with a hierarchical binary
//! bag-of-words over stereo-matched keypoints, filters them with score
//! normalization, island grouping and a temporal consistency gate, and
//! verifies the surviving candidate geometrically: candidate-frame
//! landmarks are triangulated from the rectified stereo pair and a robust
//! Perspective-n-Point solve yields a metric SE(3) relative pose.
//!
//! Modules:
//! - [`pose`], [`camera`], [`frame`], [`config`]: shared domain types.
//! - [`features`]: oriented corner detection and 256-bit binary descriptors.
//! - [`stereo`]: rectified matching, triangulation, depth window, PnP.
//! - [`vocab`]: vocabulary tree training, BoW transform and scoring.
//! - [`loopdb`]: inverted-index database, score normalization, islands.
//! - [`pipeline`]: per-frame orchestration producing [`pipeline::LoopDetection`]s.
//! - [`eval`]: datasets, keyframing, ground-truth metrics, synthetic scenes.

pub mod camera;
pub mod config;
pub mod eval;
pub mod features;
pub mod frame;
pub mod loopdb;
pub mod pipeline;
pub mod pose;
pub mod stereo;
pub mod vocab;

pub use camera::CameraCalibration;
pub use config::PipelineConfig;
pub use features::{BinaryDescriptor, Keypoint};
pub use frame::FrameId;
pub use pipeline::{LoopDetection, LoopPipeline, Outcome, StereoObservation};
pub use pose::Pose;
pub use vocab::{BowVector, VocabularyTree};
