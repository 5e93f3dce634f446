//! Pipeline configuration and its on-disk key-value format.
//!
//! The file format is one `key = value` pair per line with `#` comments.
//! Every field has a key and unknown keys are an error, so a typo in a
//! config file fails loudly instead of silently running defaults.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Feature detection knobs. The corner threshold and pyramid depth are
/// artifact decisions; single scale is the default for far-field imagery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureConfig {
    /// Minimum center-vs-ring intensity difference for the segment test.
    pub fast_threshold: u8,
    /// Number of half-resolution pyramid levels used for detection (>= 1).
    pub octaves: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20,
            octaves: 1,
        }
    }
}

/// Descriptor matching thresholds shared by the stereo and cross-frame
/// matchers. Distances are Hamming distances out of 256.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchingConfig {
    /// Maximum |v_left - v_right| for a rectified stereo match, in pixels.
    pub stereo_row_tolerance: f64,
    /// Maximum Hamming distance for a stereo match.
    pub stereo_max_hamming: u32,
    /// Maximum Hamming distance for a query/candidate match.
    pub cross_max_hamming: u32,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        Self {
            stereo_row_tolerance: 2.0,
            stereo_max_hamming: 50,
            cross_max_hamming: 50,
        }
    }
}

/// Robust PnP estimation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RansacConfig {
    /// Upper bound on consensus iterations; the adaptive inlier-ratio rule
    /// may stop earlier.
    pub iterations: usize,
    /// Inlier reprojection error threshold in pixels.
    pub pixel_threshold: f64,
    /// Target confidence for the adaptive stopping rule.
    pub confidence: f64,
    /// Seed for the sampling RNG; fixed seed means a reproducible estimate.
    pub seed: u64,
    /// Gauss-Newton refinement iteration cap.
    pub refine_max_iterations: usize,
    /// Refinement stops when the update step norm falls below this.
    pub refine_step_tolerance: f64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            pixel_threshold: 2.0,
            confidence: 0.99,
            seed: 1,
            refine_max_iterations: 50,
            refine_step_tolerance: 1e-10,
        }
    }
}

/// Full pipeline configuration. Defaults follow the reference deployment:
/// 2000 keypoints per image, normalized-score threshold 0.3, agreement with
/// 5 previous matches, a 20 s exclusion window, a [0.4 m, 50 m] depth
/// window, and a 20-feature floor at every geometric stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Keypoints extracted per image.
    pub feature_count: usize,
    /// Minimum normalized similarity (eta) for a loop candidate.
    pub norm_score_threshold: f64,
    /// Number of previous queries whose winning islands must overlap.
    pub consistency_length: usize,
    /// Frames closer in time than this are never loop candidates (seconds).
    pub temporal_exclusion: f64,
    /// Triangulated landmarks outside [depth_min, depth_max] are discarded (meters).
    pub depth_min: f64,
    pub depth_max: f64,
    /// Minimum surviving features at each stage (stereo, cross-frame, PnP).
    pub min_features_floor: usize,
    /// When set, the floor is recomputed as 1% of `feature_count`.
    pub ablation_floor: bool,
    /// Maximum timestamp gap inside one candidate island (seconds).
    pub island_max_gap: f64,
    pub features: FeatureConfig,
    pub matching: MatchingConfig,
    pub ransac: RansacConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            feature_count: 2000,
            norm_score_threshold: 0.3,
            consistency_length: 5,
            temporal_exclusion: 20.0,
            depth_min: 0.4,
            depth_max: 50.0,
            min_features_floor: 20,
            ablation_floor: false,
            island_max_gap: 3.0,
            features: FeatureConfig::default(),
            matching: MatchingConfig::default(),
            ransac: RansacConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Effective per-stage feature floor. In ablation mode this is 1% of the
    /// extracted feature count, never below the PnP minimal case of 4.
    pub fn features_floor(&self) -> usize {
        if self.ablation_floor {
            ((self.feature_count as f64) * 0.01).ceil().max(4.0) as usize
        } else {
            self.min_features_floor
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.depth_min < self.depth_max) {
            return Err(ConfigError::Invalid(format!(
                "depth window is empty: [{}, {}]",
                self.depth_min, self.depth_max
            )));
        }
        if !(self.norm_score_threshold > 0.0 && self.norm_score_threshold <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "norm_score_threshold must be in (0, 1], got {}",
                self.norm_score_threshold
            )));
        }
        if self.min_features_floor < 4 {
            return Err(ConfigError::Invalid(format!(
                "min_features_floor must be at least 4 (PnP minimal case), got {}",
                self.min_features_floor
            )));
        }
        if self.temporal_exclusion < 0.0 {
            return Err(ConfigError::Invalid(format!(
                "temporal_exclusion must be non-negative, got {}",
                self.temporal_exclusion
            )));
        }
        if self.island_max_gap < 0.0 {
            return Err(ConfigError::Invalid(format!(
                "island_max_gap must be non-negative, got {}",
                self.island_max_gap
            )));
        }
        if self.features.octaves == 0 {
            return Err(ConfigError::Invalid("octaves must be >= 1".into()));
        }
        if self.ransac.iterations == 0 {
            return Err(ConfigError::Invalid("ransac_iterations must be >= 1".into()));
        }
        if !(self.ransac.pixel_threshold > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "ransac_pixel_threshold must be positive, got {}",
                self.ransac.pixel_threshold
            )));
        }
        if !(self.ransac.confidence > 0.0 && self.ransac.confidence < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "ransac_confidence must be in (0, 1), got {}",
                self.ransac.confidence
            )));
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_contents(&text)
    }

    /// Parses the key-value format. Missing keys keep their defaults.
    pub fn from_str_contents(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
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
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(line_no, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ConfigError::BadValue {
                line,
                key: key.to_string(),
                reason: e.to_string(),
            })
        }

        match key {
            "feature_count" => self.feature_count = parse(line, key, value)?,
            "norm_score_threshold" => self.norm_score_threshold = parse(line, key, value)?,
            "consistency_length" => self.consistency_length = parse(line, key, value)?,
            "temporal_exclusion" => self.temporal_exclusion = parse(line, key, value)?,
            "depth_min" => self.depth_min = parse(line, key, value)?,
            "depth_max" => self.depth_max = parse(line, key, value)?,
            "min_features_floor" => self.min_features_floor = parse(line, key, value)?,
            "ablation_floor" => self.ablation_floor = parse(line, key, value)?,
            "island_max_gap" => self.island_max_gap = parse(line, key, value)?,
            "fast_threshold" => self.features.fast_threshold = parse(line, key, value)?,
            "octaves" => self.features.octaves = parse(line, key, value)?,
            "stereo_row_tolerance" => {
                self.matching.stereo_row_tolerance = parse(line, key, value)?
            }
            "stereo_max_hamming" => self.matching.stereo_max_hamming = parse(line, key, value)?,
            "cross_max_hamming" => self.matching.cross_max_hamming = parse(line, key, value)?,
            "ransac_iterations" => self.ransac.iterations = parse(line, key, value)?,
            "ransac_pixel_threshold" => self.ransac.pixel_threshold = parse(line, key, value)?,
            "ransac_confidence" => self.ransac.confidence = parse(line, key, value)?,
            "ransac_seed" => self.ransac.seed = parse(line, key, value)?,
            "refine_max_iterations" => {
                self.ransac.refine_max_iterations = parse(line, key, value)?
            }
            "refine_step_tolerance" => {
                self.ransac.refine_step_tolerance = parse(line, key, value)?
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_deployment() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.feature_count, 2000);
        assert_eq!(cfg.norm_score_threshold, 0.3);
        assert_eq!(cfg.consistency_length, 5);
        assert_eq!(cfg.temporal_exclusion, 20.0);
        assert_eq!(cfg.depth_min, 0.4);
        assert_eq!(cfg.depth_max, 50.0);
        assert_eq!(cfg.min_features_floor, 20);
        assert_eq!(cfg.island_max_gap, 3.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn ablation_floor_is_one_percent_of_feature_count() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.features_floor(), 20);
        cfg.ablation_floor = true;
        cfg.feature_count = 4000;
        assert_eq!(cfg.features_floor(), 40);
        cfg.feature_count = 8000;
        assert_eq!(cfg.features_floor(), 80);
        cfg.feature_count = 150;
        assert_eq!(cfg.features_floor(), 4); // clamped to PnP minimal case
    }

    #[test]
    fn parses_key_value_file_with_comments() {
        let cfg = PipelineConfig::from_str_contents(
            "# loop detector settings\n\
             feature_count = 4000\n\
             norm_score_threshold = 0.25  # inline comment\n\
             ransac_seed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.feature_count, 4000);
        assert_eq!(cfg.norm_score_threshold, 0.25);
        assert_eq!(cfg.ransac.seed, 42);
        // untouched keys keep defaults
        assert_eq!(cfg.consistency_length, 5);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = PipelineConfig::from_str_contents("feature_cout = 100\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { key, .. } if key == "feature_cout"));
    }

    #[test]
    fn malformed_line_is_an_error() {
        assert!(matches!(
            PipelineConfig::from_str_contents("feature_count 100\n"),
            Err(ConfigError::Syntax { .. })
        ));
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(PipelineConfig::from_str_contents("depth_min = 60\n").is_err());
        assert!(PipelineConfig::from_str_contents("norm_score_threshold = 0\n").is_err());
        assert!(PipelineConfig::from_str_contents("norm_score_threshold = 1.5\n").is_err());
        assert!(PipelineConfig::from_str_contents("min_features_floor = 3\n").is_err());
        assert!(PipelineConfig::from_str_contents("norm_score_threshold = 1.0\n").is_ok());
    }

    #[test]
    fn bad_value_reports_key_and_line() {
        let err = PipelineConfig::from_str_contents("\nfeature_count = lots\n").unwrap_err();
        match err {
            ConfigError::BadValue { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "feature_count");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
