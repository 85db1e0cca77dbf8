//! Acceptance suite: one test per criterion, each printing a pass line and
//! asserting its runtime budget. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the pass lines).

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use graspkit::dataset::{
    augment_rotate180, build_vpt, load_dataset, save_dataset, LabelScheme, VPTDataset,
};
use graspkit::harness::{
    benchmark_metric, run_accuracy, run_comparison, run_novel_object_accuracy, spearman_rho,
    PolicyModels,
};
use graspkit::learning::{gradient_check, pool_features, train, TrainConfig, TrainSet};
use graspkit::pipeline::{candidate_windows, expand_configurations, CandidateWindow, WINDOW_SIZE};
use graspkit::raster::GrayImage;
use graspkit::rng::SplitMix64;
use graspkit::scene::{World, GRASP_ANGLES_DEG, SCENE_HEIGHT, SCENE_WIDTH};
use graspkit::shake::{
    base_pressure_for_slip, endurance_score, sample_scenarios, simulate_shake, CategoryMix,
    ContactScenario, ShakeProtocol,
};
use graspkit::tactile::{
    categorize, grasp_score, slip_magnitude, space_convolve, time_convolve, GraspScore,
    MetricParams, StabilityCategory, TactileImage,
};

/// The standard synthetic dataset: the five presets, 300 grasps each,
/// master seed 7, 3000 records after augmentation. Built once and shared.
fn standard() -> &'static (World, VPTDataset) {
    static STANDARD: OnceLock<(World, VPTDataset)> = OnceLock::new();
    STANDARD.get_or_init(|| {
        let world = World::known();
        let dataset = build_vpt(&world, 300, 7).expect("standard dataset builds");
        assert_eq!(dataset.records.len(), 3000);
        (world, dataset)
    })
}

fn assert_runtime(criterion: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
    println!("{criterion}: PASS ({elapsed:.2?})");
}

#[test]
fn criterion_1_metric_oracle_equivalence() {
    let start = Instant::now();
    let params = MetricParams::default();
    let score_of = |scenario: &ContactScenario| {
        grasp_score(&simulate_shake(scenario).image, &params)
    };

    // Failure: the jaws closed on air.
    let failure = ContactScenario::no_contact(1).with_noise(0.0);
    let s = score_of(&failure);
    assert_eq!(s.value(), 0.0);
    assert_eq!(categorize(s), StabilityCategory::Failure);

    // Falling at every movement index.
    for k in 1..=4u8 {
        let scenario = ContactScenario::fall_after(k, 1).with_noise(0.0);
        let s = score_of(&scenario);
        let expected = 0.5 * k as f64 / 5.0;
        assert!(
            (s.value() - expected).abs() < 1e-9,
            "fall k={k}: {} vs {expected}",
            s.value()
        );
        assert_eq!(categorize(s), StabilityCategory::Falling);
    }

    // Slip magnitudes 0, 50, ..., 5000, base pressure raised so the
    // construction never clamps.
    for i in 0..=100u32 {
        let m = 50.0 * i as f64;
        let scenario = ContactScenario::slip(m, 1)
            .with_noise(0.0)
            .with_base_pressure(base_pressure_for_slip(m, 100.0));
        let sim = simulate_shake(&scenario);
        assert!(!sim.clamped, "m={m} must not clamp");
        let s = grasp_score(&sim.image, &params);
        let expected = 0.5 * (-m / 1000.0).exp() + 0.5;
        assert!(
            (s.value() - expected).abs() < 1e-9,
            "slip m={m}: {} vs {expected}",
            s.value()
        );
        let expected_category = if expected > 0.85 {
            StabilityCategory::Stable
        } else {
            StabilityCategory::Slippery
        };
        assert_eq!(categorize(s), expected_category, "m={m}");
    }

    // Interval boundaries, including 0.85 belonging to slippery.
    assert_eq!(categorize(GraspScore::new(0.85).unwrap()), StabilityCategory::Slippery);
    assert_eq!(categorize(GraspScore::new(0.5).unwrap()), StabilityCategory::Falling);
    assert_eq!(
        categorize(GraspScore::new(0.8500001).unwrap()),
        StabilityCategory::Stable
    );

    assert_runtime("criterion 1 (metric oracle equivalence)", start, Duration::from_secs(1));
}

#[test]
fn criterion_2_kernel_invariances() {
    let start = Instant::now();
    // Entries and offsets on a 2^-10 grid: every sum and difference the
    // kernels take is then exact in f64, so the invariance holds to 0.0.
    let grid = |rng: &mut SplitMix64, max_units: usize| rng.next_below(max_units) as f64 / 1024.0;
    let mut rng = SplitMix64::new(20_240_807);

    for case in 0..1000 {
        let mut rows = [[0.0f64; 5]; 5];
        for row in rows.iter_mut() {
            for cell in row.iter_mut() {
                *cell = grid(&mut rng, 204_800); // [0, 200)
            }
        }
        let image = TactileImage::from_rows(rows).unwrap();

        // Per-column offsets leave the time kernel output unchanged.
        let column_offsets: Vec<f64> = (0..5).map(|_| grid(&mut rng, 32_768)).collect();
        let mut shifted = rows;
        for row in shifted.iter_mut() {
            for (p, cell) in row.iter_mut().enumerate() {
                *cell += column_offsets[p];
            }
        }
        let shifted_image = TactileImage::from_rows(shifted).unwrap();
        let a = time_convolve(&image);
        let b = time_convolve(&shifted_image);
        for t in 0..4 {
            for p in 0..5 {
                assert!(
                    (a.get(t, p) - b.get(t, p)).abs() <= 1e-12,
                    "case {case}: time kernel moved under column offsets"
                );
            }
        }

        // Per-row offsets leave the slip magnitude unchanged.
        let mut row_shifted = rows;
        for row in row_shifted.iter_mut() {
            let offset = grid(&mut rng, 32_768);
            for cell in row.iter_mut() {
                *cell += offset;
            }
        }
        let row_shifted_image = TactileImage::from_rows(row_shifted).unwrap();
        assert!(
            (slip_magnitude(&image) - slip_magnitude(&row_shifted_image)).abs() <= 1e-12,
            "case {case}: slip magnitude moved under row offsets"
        );
        // The full space-kernel output is invariant too.
        let sa = space_convolve(&image);
        let sb = space_convolve(&row_shifted_image);
        for t in 0..4 {
            for p in 0..4 {
                assert!((sa.get(t, p) - sb.get(t, p)).abs() <= 1e-12);
            }
        }
    }

    assert_runtime("criterion 2 (kernel invariances)", start, Duration::from_secs(1));
}

#[test]
fn criterion_3_metric_consistency_benchmark() {
    let start = Instant::now();
    let world = World::known();

    // 500 mixed scenarios, sensor noise 0.5, seed 7.
    let bench = benchmark_metric(500, &CategoryMix::default(), 7, &world).unwrap();
    assert!(
        bench.pairs.iter().all(|(_, e)| (0.0..=1.0).contains(e)),
        "endurance scores in [0, 1]"
    );
    assert!(
        bench.spearman_rho >= 0.9,
        "mixed-batch rho {} below 0.9",
        bench.spearman_rho
    );

    // Noiseless all-slip scenarios: both scores are strictly monotone in
    // the slip magnitude, so the rank correlation is exactly 1.
    let scenarios = sample_scenarios(200, &CategoryMix::all_slip(), 7).unwrap();
    let protocol = ShakeProtocol::default();
    let mut scores = Vec::new();
    let mut endurances = Vec::new();
    for scenario in &scenarios {
        let noiseless = scenario.clone().with_noise(0.0);
        scores.push(grasp_score(&simulate_shake(&noiseless).image, &world.metric).value());
        endurances.push(endurance_score(&noiseless, &protocol));
    }
    let (rho, degenerate) = spearman_rho(&scores, &endurances);
    assert!(!degenerate);
    assert_eq!(rho, 1.0, "noiseless all-slip rho must be exactly 1");

    assert_runtime("criterion 3 (metric consistency benchmark)", start, Duration::from_secs(5));
}

#[test]
fn criterion_4_learning_pipeline() {
    let start = Instant::now();
    let (_, dataset) = standard();

    // 80/20 stratified split accuracy with the SCG preset.
    let report = run_accuracy(dataset, LabelScheme::Scg, 7).unwrap();
    assert!(
        report.heldout_accuracy >= 0.85,
        "heldout accuracy {} below 0.85",
        report.heldout_accuracy
    );
    assert!(
        report.last_epoch_loss < report.first_epoch_loss,
        "training loss did not decrease: {} -> {}",
        report.first_epoch_loss,
        report.last_epoch_loss
    );

    // Whole-object holdout: mean leave-one-object-out accuracy.
    let novel = run_novel_object_accuracy(dataset, LabelScheme::Scg, 7).unwrap();
    assert_eq!(novel.len(), 5);
    let mean: f64 = novel.iter().map(|(_, a)| a).sum::<f64>() / novel.len() as f64;
    assert!(mean >= 0.70, "novel-object mean accuracy {mean} below 0.70");

    // Gradient check on a trained model and a real sample.
    let set = TrainSet::from_dataset(dataset, LabelScheme::Scg).unwrap();
    let (model, _) = train(&set, None, &TrainConfig::preset(LabelScheme::Scg, 7)).unwrap();
    let mut worst: f64 = 0.0;
    for index in [0usize, 117, 1500, 2999] {
        let features = pool_features(&dataset.records[index].patch).unwrap();
        let label = LabelScheme::Scg.label(dataset.records[index].score);
        worst = worst.max(gradient_check(&model, &features, label));
    }
    assert!(worst <= 1e-5, "gradient check worst relative error {worst}");

    assert_runtime("criterion 4 (learning pipeline)", start, Duration::from_secs(120));
}

#[test]
fn criterion_5_geometry() {
    let start = Instant::now();

    // Exactly 20 in-bounds windows on the standard scene.
    let image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 200);
    let windows = candidate_windows(&image).unwrap();
    assert_eq!(windows.len(), 20);
    for w in &windows {
        assert!(w.x + WINDOW_SIZE <= SCENE_WIDTH);
        assert!(w.y + WINDOW_SIZE <= SCENE_HEIGHT);
    }

    // 54 proposals: 9 distinct centers x 6 distinct angles.
    let proposals = expand_configurations(&image, &CandidateWindow { x: 80, y: 78 });
    assert_eq!(proposals.len(), 54);
    let mut centers: Vec<(i32, i32)> =
        proposals.iter().map(|p| (p.config.u, p.config.v)).collect();
    centers.sort_unstable();
    centers.dedup();
    assert_eq!(centers.len(), 9);
    let mut angles: Vec<u16> = proposals.iter().map(|p| p.config.angle_deg).collect();
    angles.sort_unstable();
    angles.dedup();
    assert_eq!(angles, GRASP_ANGLES_DEG.to_vec());

    // 180-degree augmentation is an involution and preserves scores exactly.
    let world = World::known();
    let dataset = build_vpt(&world, 4, 11).unwrap();
    for record in dataset.records.iter().filter(|r| !r.augmented) {
        let twin = augment_rotate180(record, record.id + 10_000).unwrap();
        assert_eq!(twin.patch.rotate180(), record.patch);
        assert_eq!(twin.patch.rotate180().rotate180(), twin.patch);
        assert_eq!(twin.score, record.score);
        assert_eq!(twin.category, record.category);
    }

    assert_runtime("criterion 5 (geometry)", start, Duration::from_secs(1));
}

#[test]
fn criterion_6_policy_comparison_direction() {
    let start = Instant::now();
    let (world, dataset) = standard();

    let train_preset = |scheme: LabelScheme| {
        let set = TrainSet::from_dataset(dataset, scheme).unwrap();
        train(&set, None, &TrainConfig::preset(scheme, 7)).unwrap().0
    };
    let models = PolicyModels {
        region: train_preset(LabelScheme::Gre),
        stable: train_preset(LabelScheme::Scg),
        vision: train_preset(LabelScheme::VisionBaseline),
    };

    let report = run_comparison(world, &models, 100, 7).unwrap();
    assert_eq!(report.per_object.len(), 5);
    for o in &report.per_object {
        assert_eq!(o.trials, 100);
        assert!((0.0..=1.0).contains(&o.bayesian_rate));
        assert!((0.0..=1.0).contains(&o.vision_rate));
    }
    assert!(
        report.mean_point_gain >= 0.15,
        "mean point gain {:+.3} below +0.15 (bayesian {:.3}, vision {:.3})",
        report.mean_point_gain,
        report.mean_bayesian_rate,
        report.mean_vision_rate
    );

    // Byte-identical reports across two runs with the same seed.
    let again = run_comparison(world, &models, 100, 7).unwrap();
    let json_a = serde_json::to_string_pretty(&report).unwrap();
    let json_b = serde_json::to_string_pretty(&again).unwrap();
    assert_eq!(json_a, json_b, "summary JSON differs between runs");
    assert_eq!(report.to_table_csv(), again.to_table_csv(), "table CSV differs between runs");

    assert_runtime("criterion 6 (policy comparison direction)", start, Duration::from_secs(120));
}

#[test]
fn criterion_7_persistence_round_trip() {
    let start = Instant::now();
    let world = World::known();
    let dataset = build_vpt(&world, 20, 7).unwrap();
    assert_eq!(dataset.records.len(), 200);

    let base = std::env::temp_dir().join(format!("graspkit-acceptance-{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    let _ = std::fs::remove_dir_all(&base);

    // Save, load, and compare: identical records.
    save_dataset(&dataset, &dir_a).unwrap();
    let loaded = load_dataset(&dir_a).unwrap();
    assert_eq!(loaded, dataset);

    // Re-saving the loaded dataset reproduces the directory byte for byte.
    save_dataset(&loaded, &dir_b).unwrap();
    for name in ["manifest.json", "records.jsonl"] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs after a save/load/save cycle");
    }
    for record in &dataset.records {
        for sub in ["patches", "tactile"] {
            let ext = if sub == "patches" { "pgm" } else { "csv" };
            let rel = format!("{sub}/{}.{ext}", record.id);
            let a = std::fs::read(dir_a.join(&rel)).unwrap();
            let b = std::fs::read(dir_b.join(&rel)).unwrap();
            assert_eq!(a, b, "{rel} differs after a save/load/save cycle");
        }
    }

    // Corrupting a patch file fails the load and names the record.
    let victim = dir_a.join("patches").join("7.pgm");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes[200] ^= 0xFF;
    std::fs::write(&victim, bytes).unwrap();
    let err = load_dataset(&dir_a).unwrap_err().to_string();
    assert!(err.contains("record 7"), "error does not name the record: {err}");

    // Restoring and corrupting the manifest count also fails the load.
    save_dataset(&dataset, &dir_a).unwrap();
    let manifest_path = dir_a.join("manifest.json");
    let mangled = std::fs::read_to_string(&manifest_path)
        .unwrap()
        .replace("\"total_records\": 200", "\"total_records\": 201");
    std::fs::write(&manifest_path, mangled).unwrap();
    let err = load_dataset(&dir_a).unwrap_err().to_string();
    assert!(err.contains("201") && err.contains("200"), "manifest count error: {err}");

    let _ = std::fs::remove_dir_all(&base);
    assert_runtime("criterion 7 (persistence round trip)", start, Duration::from_secs(30));
}
