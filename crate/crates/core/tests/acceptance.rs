//! Acceptance suite: one test per criterion, each ending with a PASS line
//! (visible under `cargo test -- --nocapture`).
//!
//! Numeric bounds marked "frozen" were established by the first run of the
//! corresponding oracle on the fixed seeds below and are regression-tested
//! since.

use std::time::Instant;

use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use stereoloop::config::{PipelineConfig, RansacConfig};
use stereoloop::eval::dataset::DatasetLayout;
use stereoloop::eval::synth::{
    generate_synthetic, NoiseConfig, Scenario, SynthConfig, SyntheticDataset, TrajectoryConfig,
    WorldConfig,
};
use stereoloop::eval::{forward_axis_angle, Trajectory};
use stereoloop::features::BinaryDescriptor;
use stereoloop::frame::FrameId;
use stereoloop::loopdb::{LoopDatabase, NORMALIZER_EPSILON};
use stereoloop::pipeline::{LoopDetection, LoopPipeline, Outcome, StereoObservation};
use stereoloop::pose::Pose;
use stereoloop::stereo::{pnp_ransac, Landmark3D};
use stereoloop::vocab::{score, score_overlap, BowVector, VocabularyTree};
use stereoloop::CameraCalibration;

fn random_descriptor(rng: &mut StdRng) -> BinaryDescriptor {
    BinaryDescriptor([rng.random(), rng.random(), rng.random(), rng.random()])
}

fn test_calibration() -> CameraCalibration {
    CameraCalibration::new(460.0, 320.0, 240.0, 0.2, 640, 480).unwrap()
}

// --- criterion 1 -----------------------------------------------------------

/// Brute-force retrieval oracle: per-frame sorted-merge scoring with the
/// exclusion window, eta normalization, threshold and tie rules applied
/// independently of the inverted index.
fn oracle_query(
    stored: &[(FrameId, BowVector)],
    query: &BowVector,
    timestamp: f64,
    cfg: &PipelineConfig,
) -> Result<Vec<(u64, f64, f64)>, &'static str> {
    let (_, prev) = stored.last().ok_or("no previous frame")?;
    let s_prev = score_overlap(query, prev);
    if s_prev < NORMALIZER_EPSILON {
        return Err("degenerate normalizer");
    }
    let mut out: Vec<(u64, f64, f64)> = Vec::new();
    for (id, vector) in stored {
        if id.timestamp > timestamp - cfg.temporal_exclusion {
            continue;
        }
        let s = score_overlap(query, vector);
        if s <= 0.0 {
            continue;
        }
        let eta = s / s_prev;
        if eta >= cfg.norm_score_threshold {
            out.push((id.index, s, eta));
        }
    }
    out.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
    Ok(out)
}

#[test]
fn criterion_1_retrieval_matches_brute_force_oracle() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC1);
    let cfg = PipelineConfig {
        temporal_exclusion: 0.0,
        norm_score_threshold: 1e-9,
        ..PipelineConfig::default()
    };

    let mut total_queries = 0usize;
    let mut total_candidates = 0usize;
    for db_round in 0..20 {
        // Fresh vocabulary per database.
        let corpus: Vec<BinaryDescriptor> =
            (0..1400).map(|_| random_descriptor(&mut rng)).collect();
        let vocab = VocabularyTree::train(&corpus, 10, 3, 1000 + db_round).unwrap();

        let frame_count = rng.random_range(50..=1000);
        let mut db = LoopDatabase::new();
        let mut stored: Vec<(FrameId, BowVector)> = Vec::new();
        for i in 0..frame_count {
            let n = rng.random_range(20..120);
            let descs: Vec<BinaryDescriptor> = (0..n)
                .map(|_| corpus[rng.random_range(0..corpus.len())])
                .collect();
            let vector = vocab.transform(&descs);
            let id = FrameId::new(i as u64, i as f64);
            db.add(id, vector.clone()).unwrap();
            stored.push((id, vector));
        }

        for _ in 0..5 {
            total_queries += 1;
            let n = rng.random_range(20..120);
            let descs: Vec<BinaryDescriptor> = (0..n)
                .map(|_| corpus[rng.random_range(0..corpus.len())])
                .collect();
            let query = vocab.transform(&descs);
            let t = frame_count as f64 + 10.0;

            let expected = oracle_query(&stored, &query, t, &cfg);
            match (db.query(&query, t, &cfg), expected) {
                (Ok((got, _)), Ok(expected)) => {
                    assert_eq!(got.len(), expected.len(), "candidate count differs");
                    for (g, e) in got.iter().zip(expected.iter()) {
                        assert_eq!(g.frame.index, e.0, "ranking order differs");
                        assert!(
                            (g.score - e.1).abs() <= 1e-12,
                            "score {} vs oracle {}",
                            g.score,
                            e.1
                        );
                        assert!((g.normalized - e.2).abs() <= 1e-12);
                        // Third route: the direct L1 formula agrees too.
                        let direct =
                            score(&query, db.vector(g.frame.index).unwrap()).unwrap();
                        assert!((direct - g.score).abs() <= 1e-12);
                        total_candidates += 1;
                    }
                }
                (Err(_), Err(_)) => {} // both routes abstain together
                (got, expected) => {
                    panic!("index and oracle disagree on abstention: {got:?} vs {expected:?}")
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion 1 took {elapsed:.1} s (budget 60 s)");
    println!(
        "[ACCEPTANCE] criterion 1 (retrieval-oracle equivalence): PASS — \
         20 databases, {total_queries} queries, {total_candidates} candidates, {elapsed:.1} s"
    );
}

// --- criterion 2 -----------------------------------------------------------

fn random_pose(rng: &mut StdRng) -> Pose {
    let q = nalgebra::Quaternion::new(
        rng.sample::<f64, _>(rand_distr::StandardNormal),
        rng.sample::<f64, _>(rand_distr::StandardNormal),
        rng.sample::<f64, _>(rand_distr::StandardNormal),
        rng.sample::<f64, _>(rand_distr::StandardNormal),
    );
    Pose::new(
        nalgebra::UnitQuaternion::new_normalize(q),
        Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ),
    )
}

/// Forward-projection oracle: landmarks sampled in the query frame, mapped
/// through the inverse of the true pose, pixels from exact projection.
fn pnp_instance(
    rng: &mut StdRng,
    n: usize,
    depth: (f64, f64),
) -> (Vec<Landmark3D>, Vec<(f64, f64)>, Pose) {
    let cal = test_calibration();
    let truth = random_pose(rng);
    let inverse = truth.inverse();
    let mut landmarks = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n);
    for i in 0..n {
        let z = rng.random_range(depth.0..depth.1);
        let u = rng.random_range(20.0..620.0);
        let v = rng.random_range(20.0..460.0);
        let in_query = cal.backproject(u, v, z);
        let (pu, pv) = cal.project(&in_query).unwrap();
        landmarks.push(Landmark3D {
            position: inverse.transform_point(&in_query),
            source: i,
        });
        pixels.push((pu, pv));
    }
    (landmarks, pixels, truth)
}

#[test]
fn criterion_2_noise_free_geometry_is_exact() {
    let started = Instant::now();
    let cal = test_calibration();
    let mut rng = StdRng::seed_from_u64(0xC2);
    let ransac = RansacConfig::default();

    let mut worst_rotation = 0.0f64;
    let mut worst_translation = 0.0f64;
    for trial in 0..1000 {
        let n = rng.random_range(20..=60);
        let (landmarks, pixels, truth) = pnp_instance(&mut rng, n, (0.5, 45.0));
        let result = pnp_ransac(&landmarks, &pixels, &cal, &ransac, 20)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        let rot = result.pose.rotation_angle_to(&truth);
        let trans = result.pose.translation_distance_to(&truth);
        assert!(rot < 1e-6, "trial {trial}: rotation error {rot:e}");
        assert!(trans < 1e-6, "trial {trial}: translation error {trans:e}");
        assert_eq!(result.inliers.len(), n, "trial {trial}: lost inliers");
        worst_rotation = worst_rotation.max(rot);
        worst_translation = worst_translation.max(trans);
    }

    // Triangulate-project round trips are exact to closed form.
    let mut worst_pixel = 0.0f64;
    for _ in 0..100_000 {
        let u = rng.random_range(0.0..640.0);
        let v = rng.random_range(0.0..480.0);
        let d = rng.random_range(0.5..200.0);
        let p = stereoloop::stereo::triangulate_pixel(u, v, d, &cal).unwrap();
        let (pu, pv) = cal.project(&p).unwrap();
        worst_pixel = worst_pixel.max((pu - u).abs().max((pv - v).abs()));
    }
    assert!(
        worst_pixel < 1e-12,
        "triangulate-project round trip drifted {worst_pixel:e} px"
    );

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 2 took {elapsed:.1} s (budget 30 s)");
    println!(
        "[ACCEPTANCE] criterion 2 (geometry exactness): PASS — 1000 instances, \
         worst rotation {worst_rotation:.2e} rad, worst translation {worst_translation:.2e} m, \
         worst round trip {worst_pixel:.2e} px, {elapsed:.1} s"
    );
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_pnp_rejects_outliers_within_frozen_bound() {
    // 30% outliers, 1 px inlier noise, ~5 m median depth. Frozen bound from
    // the first Monte-Carlo run of this oracle: measured median translation
    // error 0.0053 m; asserted with margin at 0.02 m, comfortably inside
    // the centimeter regime.
    const FROZEN_MEDIAN_BOUND: f64 = 0.02;

    let cal = test_calibration();
    let mut rng = StdRng::seed_from_u64(0xC3);
    let ransac = RansacConfig::default();
    let mut errors = Vec::new();
    for trial in 0..100 {
        let n = 60;
        let (landmarks, mut pixels, truth) = pnp_instance(&mut rng, n, (0.5, 9.5));
        // Corrupt 30%: uniform random pixels forced well past the inlier
        // threshold of their true projection.
        let mut outliers = Vec::new();
        for k in 0..(3 * n / 10) {
            let idx = k * 3;
            let clean = pixels[idx];
            loop {
                let candidate = (rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
                let d =
                    ((candidate.0 - clean.0).powi(2) + (candidate.1 - clean.1).powi(2)).sqrt();
                if d > 3.0 * ransac.pixel_threshold {
                    pixels[idx] = candidate;
                    break;
                }
            }
            outliers.push(idx);
        }
        for (i, px) in pixels.iter_mut().enumerate() {
            if outliers.contains(&i) {
                continue;
            }
            px.0 += rng.sample::<f64, _>(rand_distr::StandardNormal);
            px.1 += rng.sample::<f64, _>(rand_distr::StandardNormal);
        }

        let result = pnp_ransac(&landmarks, &pixels, &cal, &ransac, 20)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        for outlier in &outliers {
            assert!(
                !result.inliers.contains(outlier),
                "trial {trial}: injected outlier {outlier} accepted"
            );
        }
        errors.push(result.pose.translation_distance_to(&truth));
    }
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = errors[errors.len() / 2];
    assert!(
        median < FROZEN_MEDIAN_BOUND,
        "median translation error {median:.4} m exceeds frozen bound {FROZEN_MEDIAN_BOUND} m"
    );
    println!(
        "[ACCEPTANCE] criterion 3 (robust PnP): PASS — 100 runs, all outliers rejected, \
         median translation error {median:.4} m (frozen bound {FROZEN_MEDIAN_BOUND} m)"
    );
}

// --- criterion 4 -----------------------------------------------------------

fn out_and_back_dataset(seed: u64) -> SyntheticDataset {
    let cfg = SynthConfig {
        world: WorldConfig {
            landmark_count: 900,
            ..WorldConfig::default()
        },
        trajectory: TrajectoryConfig {
            scenario: Scenario::OutAndBack,
            scale: 60.0,
            laps: 1.0,
            ..TrajectoryConfig::default()
        },
        noise: NoiseConfig {
            sigma_px: 1.0,
            p_bit: 0.05,
        },
        ..SynthConfig::default()
    };
    generate_synthetic(&cfg, seed).unwrap()
}

fn vocab_from_dataset(data: &SyntheticDataset, branching: u32, depth: u32) -> VocabularyTree {
    let corpus: Vec<BinaryDescriptor> = data
        .frames
        .iter()
        .flat_map(|f| f.descriptors_left.iter().copied())
        .collect();
    VocabularyTree::train(&corpus, branching, depth, 5).unwrap()
}

fn run_pipeline(
    data: &SyntheticDataset,
    vocab: VocabularyTree,
    cfg: PipelineConfig,
) -> Vec<LoopDetection> {
    let mut pipeline = LoopPipeline::new(cfg, data.calibration, vocab).unwrap();
    let floor = pipeline.config().features_floor();
    let mut detections = Vec::new();
    for frame in &data.frames {
        let obs = StereoObservation::from_matched_features(
            frame.frame,
            frame.keypoints_left.clone(),
            frame.keypoints_right.clone(),
            frame.descriptors_left.clone(),
            frame.descriptors_right.clone(),
            pipeline.vocabulary(),
            floor,
        )
        .unwrap();
        if let Outcome::Loop(d) = pipeline.process(obs).unwrap() {
            detections.push(d);
        }
    }
    detections
}

/// Frames whose pose revisits an earlier frame: within 0.5 m, heading
/// within 45 degrees, and separated by more than the exclusion window.
fn revisit_frames(gt: &Trajectory, exclusion: f64) -> Vec<u64> {
    let samples = gt.samples();
    let mut out = Vec::new();
    for (i, late) in samples.iter().enumerate() {
        for early in &samples[..i] {
            if late.timestamp - early.timestamp <= exclusion {
                continue;
            }
            if late.pose.translation_distance_to(&early.pose) <= 0.5
                && forward_axis_angle(&late.pose, &early.pose) <= 45.0_f64.to_radians()
            {
                out.push(i as u64);
                break;
            }
        }
    }
    out
}

#[test]
fn criterion_4_end_to_end_synthetic_out_and_back() {
    let started = Instant::now();
    let data = out_and_back_dataset(0xC4);
    assert!(data.frames.len() >= 200, "only {} keyframes", data.frames.len());
    let vocab = vocab_from_dataset(&data, 10, 3);
    let cfg = PipelineConfig::default();
    let detections = run_pipeline(&data, vocab, cfg);
    assert!(!detections.is_empty(), "no detections at all");

    // (a) every detection pairs frames at most 1.5 m apart in ground truth.
    let mut errors: Vec<f64> = Vec::new();
    for d in &detections {
        let gt = data
            .groundtruth
            .relative_pose(d.query.timestamp, d.matched.timestamp)
            .unwrap();
        let distance = gt.translation().norm();
        assert!(
            distance <= 1.5,
            "detection {} -> {} spans {distance:.2} m of ground truth",
            d.query.index,
            d.matched.index
        );
        errors.push((d.relative_pose.translation() - gt.translation()).norm());
    }

    // (b) at least half of the co-oriented revisit keyframes detect.
    let revisits = revisit_frames(&data.groundtruth, cfg.temporal_exclusion);
    assert!(!revisits.is_empty(), "scenario produced no revisits");
    let detected: std::collections::HashSet<u64> =
        detections.iter().map(|d| d.query.index).collect();
    let hit = revisits.iter().filter(|i| detected.contains(i)).count();
    let recall = hit as f64 / revisits.len() as f64;
    assert!(
        recall >= 0.5,
        "recall {recall:.2} over {} revisit keyframes",
        revisits.len()
    );

    // (c) median translation error below 1 m, targeting the 15 cm regime.
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = errors[errors.len() / 2];
    assert!(median < 1.0, "median translation error {median:.3} m");
    assert!(
        median < 0.15,
        "median translation error {median:.3} m misses the 15 cm regime"
    );

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "criterion 4 took {elapsed:.1} s (budget 5 min)");
    println!(
        "[ACCEPTANCE] criterion 4 (end-to-end out-and-back): PASS — {} keyframes, \
         {} detections, recall {recall:.2} over {} revisits, median error {median:.3} m, {elapsed:.1} s",
        data.frames.len(),
        detections.len(),
        revisits.len()
    );
}

// --- criterion 5 -----------------------------------------------------------

#[test]
fn criterion_5_gate_integrity_fuzz() {
    // 10k randomized pipeline trace frames across varied scenarios, worlds
    // and noise levels: no detection may violate the exclusion window, the
    // eta threshold, the consistency gate or the feature floor at any of
    // the three gated stages.
    let mut rng = StdRng::seed_from_u64(0xC5);
    let cfg = PipelineConfig::default(); // alpha 0.3, k 5, floor 20, tau 20
    let mut corpus_rng = StdRng::seed_from_u64(0x55);
    let corpus: Vec<BinaryDescriptor> = (0..3000)
        .map(|_| random_descriptor(&mut corpus_rng))
        .collect();
    let vocab = VocabularyTree::train(&corpus, 10, 3, 3).unwrap();

    let scenarios = [Scenario::Loop, Scenario::FigureEight, Scenario::OutAndBack];
    let mut frames_processed = 0usize;
    let mut detections_seen = 0usize;
    let mut trace = 0u64;
    while frames_processed < 10_000 {
        trace += 1;
        let scenario = scenarios[rng.random_range(0..3)];
        let synth_cfg = SynthConfig {
            world: WorldConfig {
                landmark_count: rng.random_range(80..500),
                ..WorldConfig::default()
            },
            trajectory: TrajectoryConfig {
                scenario,
                scale: rng.random_range(10.0..22.0),
                laps: if scenario == Scenario::OutAndBack {
                    1.0
                } else {
                    rng.random_range(1.2..2.2)
                },
                ..TrajectoryConfig::default()
            },
            noise: NoiseConfig {
                sigma_px: rng.random_range(0.0..2.0),
                p_bit: rng.random_range(0.0..0.12),
            },
            ..SynthConfig::default()
        };
        let Ok(data) = generate_synthetic(&synth_cfg, rng.random()) else {
            continue; // landmark-starved world: infeasible by design
        };

        let mut pipeline = LoopPipeline::new(cfg, data.calibration, vocab.clone()).unwrap();
        let floor = cfg.features_floor();
        for frame in &data.frames {
            let obs = StereoObservation::from_matched_features(
                frame.frame,
                frame.keypoints_left.clone(),
                frame.keypoints_right.clone(),
                frame.descriptors_left.clone(),
                frame.descriptors_right.clone(),
                pipeline.vocabulary(),
                floor,
            )
            .unwrap();
            let records_before = pipeline.database().records().len();
            let outcome = pipeline.process(obs).unwrap();
            frames_processed += 1;

            if let Outcome::Loop(d) = outcome {
                detections_seen += 1;
                // Exclusion window.
                assert!(
                    d.query.timestamp - d.matched.timestamp >= cfg.temporal_exclusion,
                    "trace {trace}: detection violates the exclusion window"
                );
                // Normalized-score threshold.
                assert!(
                    d.eta >= cfg.norm_score_threshold,
                    "trace {trace}: eta {} below threshold",
                    d.eta
                );
                // Feature floor at all three gated stages.
                assert!(d.cross_matches >= floor, "trace {trace}: cross floor");
                assert!(d.depth_filtered >= floor, "trace {trace}: depth floor");
                assert!(d.inliers >= floor, "trace {trace}: inlier floor");
                // Temporal consistency: the k records preceding this query
                // all carried winning islands overlapping this island.
                let records = pipeline.database().records();
                assert!(records_before >= cfg.consistency_length);
                let (start, end) = d.island_interval;
                for record in &records[records_before - cfg.consistency_length..records_before] {
                    let (s, e) = record
                        .winning_island
                        .expect("consistency requires a winning island per record");
                    assert!(
                        s <= end + cfg.island_max_gap && start <= e + cfg.island_max_gap,
                        "trace {trace}: non-overlapping history island"
                    );
                }
            }
        }
        // Every processed frame is stored, detections and rejections alike.
        assert_eq!(pipeline.database().len(), data.frames.len());
    }
    println!(
        "[ACCEPTANCE] criterion 5 (gate integrity fuzz): PASS — {frames_processed} frames \
         across {trace} traces, {detections_seen} detections, zero gate violations"
    );
}

// --- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_feature_count_ablation_shape() {
    // n_feat in {2000, 4000, 8000} with the floor at 1% of n_feat: the
    // detection count must be non-increasing and per-frame compute time
    // increasing with n_feat (shape of the reference ablation, not its
    // absolute timings).
    let feature_counts = [2000usize, 4000, 8000];
    let mut counts = Vec::new();
    let mut timings = Vec::new();

    // Shared world and vocabulary across runs; only the feature budget and
    // floor change.
    let base = |target: usize| SynthConfig {
        world: WorldConfig {
            landmark_count: 700,
            ..WorldConfig::default()
        },
        trajectory: TrajectoryConfig {
            scenario: Scenario::OutAndBack,
            scale: 18.0,
            laps: 1.0,
            ..TrajectoryConfig::default()
        },
        noise: NoiseConfig {
            sigma_px: 1.0,
            p_bit: 0.05,
        },
        target_features: Some(target),
        ..SynthConfig::default()
    };
    let reference = generate_synthetic(&base(2000), 0xC6).unwrap();
    let vocab = vocab_from_dataset(&reference, 10, 4);

    for &n_feat in &feature_counts {
        let data = generate_synthetic(&base(n_feat), 0xC6).unwrap();
        let cfg = PipelineConfig {
            feature_count: n_feat,
            ablation_floor: true,
            ..PipelineConfig::default()
        };
        assert_eq!(cfg.features_floor(), n_feat / 100);

        let mut pipeline = LoopPipeline::new(cfg, data.calibration, vocab.clone()).unwrap();
        let floor = cfg.features_floor();
        let mut detections = 0usize;
        let started = Instant::now();
        for frame in &data.frames {
            let obs = StereoObservation::from_matched_features(
                frame.frame,
                frame.keypoints_left.clone(),
                frame.keypoints_right.clone(),
                frame.descriptors_left.clone(),
                frame.descriptors_right.clone(),
                pipeline.vocabulary(),
                floor,
            )
            .unwrap();
            if let Outcome::Loop(_) = pipeline.process(obs).unwrap() {
                detections += 1;
            }
        }
        let per_frame = started.elapsed().as_secs_f64() / data.frames.len() as f64;
        counts.push(detections);
        timings.push(per_frame);
    }

    assert!(counts[0] > 0, "no detections at n_feat = 2000: {counts:?}");
    assert!(
        counts[0] >= counts[1] && counts[1] >= counts[2],
        "detection counts not non-increasing: {counts:?}"
    );
    assert!(
        counts[2] < counts[0],
        "raising n_feat 4x did not reduce detections: {counts:?}"
    );
    assert!(
        timings[0] < timings[1] && timings[1] < timings[2],
        "per-frame time not increasing: {timings:?}"
    );
    println!(
        "[ACCEPTANCE] criterion 6 (ablation shape): PASS — detections {counts:?}, \
         per-frame seconds {timings:?}"
    );
}

// --- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_detect_is_byte_deterministic() {
    let data = out_and_back_dataset(0xC7);
    let dir = tempfile::tempdir().unwrap();
    let dataset_dir = dir.path().join("dataset");
    DatasetLayout::write_synthetic(&dataset_dir, &data).unwrap();

    let vocab = vocab_from_dataset(&data, 10, 3);
    let vocab_path = dir.path().join("vocab.voc");
    vocab.save(&vocab_path).unwrap();

    let cfg = PipelineConfig::default();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let detections_path = dir.path().join(format!("detections_{run}.csv"));
        let rejections_path = dir.path().join(format!("rejections_{run}.csv"));
        let summary = stereoloop::eval::dataset::run_detect(
            &dataset_dir,
            &vocab_path,
            &cfg,
            &detections_path,
            Some(rejections_path.as_path()),
        )
        .unwrap();
        assert!(summary.detections > 0, "determinism run found no loops");
        outputs.push((
            std::fs::read(&detections_path).unwrap(),
            std::fs::read(&rejections_path).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "detection CSVs differ between runs");
    assert_eq!(outputs[0].1, outputs[1].1, "rejection CSVs differ between runs");
    println!(
        "[ACCEPTANCE] criterion 7 (determinism): PASS — two `detect` runs produced \
         byte-identical CSV output ({} bytes)",
        outputs[0].0.len()
    );
}

// --- shared sanity: the observation dump round-trips through the runner ----

#[test]
fn observation_files_feed_the_pipeline_identically() {
    // The detect runner consuming the on-disk dataset must produce the same
    // detections as the in-memory pipeline on the same frames.
    let data = out_and_back_dataset(0xAA);
    let vocab = vocab_from_dataset(&data, 10, 3);
    let cfg = PipelineConfig::default();
    let in_memory = run_pipeline(&data, vocab.clone(), cfg);

    let dir = tempfile::tempdir().unwrap();
    let dataset_dir = dir.path().join("dataset");
    DatasetLayout::write_synthetic(&dataset_dir, &data).unwrap();
    let vocab_path = dir.path().join("vocab.voc");
    vocab.save(&vocab_path).unwrap();
    let detections_path = dir.path().join("detections.csv");
    stereoloop::eval::dataset::run_detect(&dataset_dir, &vocab_path, &cfg, &detections_path, None)
        .unwrap();
    let text = std::fs::read_to_string(&detections_path).unwrap();
    let from_disk = stereoloop::eval::parse_detections_csv(&text).unwrap();

    assert_eq!(in_memory.len(), from_disk.len());
    for (mem, disk) in in_memory.iter().zip(from_disk.iter()) {
        assert_eq!(mem.query.index, disk.query_id);
        assert_eq!(mem.matched.index, disk.match_id);
        assert_eq!(mem.inliers, disk.inliers);
        assert!(mem.relative_pose.translation_distance_to(&disk.relative_pose) < 1e-12);
    }
}
