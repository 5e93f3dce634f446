//! Command-line driver for the stereo loop detector.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use stereoloop::config::PipelineConfig;
use stereoloop::eval::dataset::{self, DatasetLayout};
use stereoloop::eval::synth::{
    generate_synthetic, NoiseConfig, Scenario, SynthConfig, TrajectoryConfig, WorldConfig,
};
use stereoloop::eval::{
    evaluate, parse_detections_csv, threshold_sweep, KeyframeConfig, Trajectory,
};
use stereoloop::vocab::VocabularyTree;

#[derive(Parser)]
#[command(
    name = "stereoloop",
    about = "Stereo loop detection: BoW retrieval, temporal filtering and PnP verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a vocabulary tree from the descriptors of a dataset.
    TrainVocab {
        /// Dataset directory to harvest descriptors from.
        descr_source: PathBuf,
        /// Output vocabulary file.
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        branching: u32,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Optional pipeline config (controls the detector for image
        /// datasets).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run loop detection over a dataset and write a detections CSV.
    Detect {
        dataset: PathBuf,
        vocab: PathBuf,
        config: PathBuf,
        #[arg(short, long, default_value = "detections.csv")]
        output: PathBuf,
        /// Also log rejected queries with their stage tags.
        #[arg(long)]
        rejections: Option<PathBuf>,
    },
    /// Score a detections CSV against a ground-truth trajectory.
    Evaluate {
        detections: PathBuf,
        groundtruth: PathBuf,
        #[arg(short, long, default_value = "report.json")]
        output: PathBuf,
    },
    /// Pairwise similarity sweep over keyframes, one row per threshold.
    Sweep {
        dataset: PathBuf,
        vocab: PathBuf,
        #[arg(short, long, default_value = "sweep.csv")]
        output: PathBuf,
        /// Thresholds to evaluate, comma separated.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        thresholds: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// New keyframe after this much travel (meters).
        #[arg(long, default_value_t = 0.5)]
        keyframe_translation: f64,
        /// New keyframe after this much rotation (degrees).
        #[arg(long, default_value_t = 10.0)]
        keyframe_rotation: f64,
    },
    /// Generate a synthetic dataset directory for a scripted scenario.
    Synth {
        /// One of: loop, figure-eight, out-and-back.
        scenario: String,
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 900)]
        landmarks: usize,
        /// Lane length or path radius (meters).
        #[arg(long, default_value_t = 60.0)]
        scale: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_px: f64,
        #[arg(long, default_value_t = 0.05)]
        p_bit: f64,
        /// Pad every frame to exactly this many features with clutter.
        #[arg(long)]
        target_features: Option<usize>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::from_file(p)
            .with_context(|| format!("loading config {}", p.display())),
        None => Ok(PipelineConfig::default()),
    }
}

fn main() {
    if let Err(error) = run(Cli::parse()) {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TrainVocab {
            descr_source,
            out,
            branching,
            depth,
            seed,
            config,
        } => {
            let cfg = load_config(&config)?;
            let descriptors = dataset::harvest_descriptors(&descr_source, &cfg)
                .with_context(|| format!("harvesting {}", descr_source.display()))?;
            eprintln!("harvested {} descriptors", descriptors.len());
            let tree = VocabularyTree::train(&descriptors, branching, depth, seed)?;
            tree.save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "trained vocabulary: {} words (branching {branching}, depth {depth})",
                tree.word_count()
            );
            Ok(())
        }
        Command::Detect {
            dataset: dataset_dir,
            vocab,
            config,
            output,
            rejections,
        } => {
            let cfg = PipelineConfig::from_file(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            let summary = dataset::run_detect(
                &dataset_dir,
                &vocab,
                &cfg,
                &output,
                rejections.as_deref(),
            )?;
            eprintln!(
                "processed {} frames: {} detections, {} rejections",
                summary.frames, summary.detections, summary.rejections
            );
            Ok(())
        }
        Command::Evaluate {
            detections,
            groundtruth,
            output,
        } => {
            let text = std::fs::read_to_string(&detections)
                .with_context(|| format!("reading {}", detections.display()))?;
            let records = parse_detections_csv(&text)?;
            let gt = Trajectory::load(&groundtruth)
                .with_context(|| format!("reading {}", groundtruth.display()))?;
            let report = evaluate(&records, &gt);
            std::fs::write(&output, serde_json::to_string_pretty(&report)?)?;
            eprintln!(
                "evaluated {} detections ({} out of span): median translation error {:.4} m",
                report.records.len(),
                report.out_of_span.len(),
                report.translation_error.median
            );
            Ok(())
        }
        Command::Sweep {
            dataset: dataset_dir,
            vocab,
            output,
            thresholds,
            config,
            keyframe_translation,
            keyframe_rotation,
        } => {
            let cfg = load_config(&config)?;
            let thresholds: Vec<f64> = thresholds
                .split(',')
                .map(|t| t.trim().parse().context("bad threshold list"))
                .collect::<Result<_>>()?;
            if thresholds.is_empty() {
                bail!("no thresholds given");
            }
            let keyframes = KeyframeConfig {
                translation: keyframe_translation,
                rotation: keyframe_rotation.to_radians(),
            };
            let pairs = dataset::run_sweep(&dataset_dir, &vocab, &cfg, &keyframes)?;
            let buckets = threshold_sweep(&pairs, &thresholds);
            let mut csv = String::from(
                "threshold,pairs,distance_min,distance_q1,distance_median,distance_q3,distance_max\n",
            );
            for b in &buckets {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    b.threshold,
                    b.pairs,
                    b.distance.min,
                    b.distance.q1,
                    b.distance.median,
                    b.distance.q3,
                    b.distance.max
                ));
            }
            std::fs::write(&output, csv)?;
            eprintln!(
                "swept {} thresholds over {} keyframe pairs",
                buckets.len(),
                pairs.len()
            );
            Ok(())
        }
        Command::Synth {
            scenario,
            seed,
            output,
            landmarks,
            scale,
            sigma_px,
            p_bit,
            target_features,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let cfg = SynthConfig {
                world: WorldConfig {
                    landmark_count: landmarks,
                    ..WorldConfig::default()
                },
                trajectory: TrajectoryConfig {
                    scenario,
                    scale,
                    ..TrajectoryConfig::default()
                },
                noise: NoiseConfig { sigma_px, p_bit },
                target_features,
                ..SynthConfig::default()
            };
            let data = generate_synthetic(&cfg, seed)?;
            DatasetLayout::write_synthetic(&output, &data)?;
            eprintln!(
                "wrote {} frames over {:.1} s to {}",
                data.frames.len(),
                data.groundtruth.span().1,
                output.display()
            );
            Ok(())
        }
    }
}
