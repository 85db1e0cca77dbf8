//! End-to-end experiments with reproducible reports.
//!
//! Three experiment families:
//!
//! * [`benchmark_metric`] — consistency of the grasp score against the
//!   shake-until-drop endurance score, measured by Spearman rank
//!   correlation over sampled scenarios.
//! * [`run_accuracy`] / [`run_novel_object_accuracy`] — classifier accuracy
//!   on a stratified 80/20 split and on whole-object holdouts.
//! * [`run_comparison`] — the policy experiment: tactile-informed planning
//!   versus the vision-only baseline, paired per trial so both policies see
//!   byte-identical scenes. Success means a realized score above 0.85;
//!   a policy that cannot commit to a grasp scores zero for that trial.
//!
//! Reports serialize deterministically: running twice with the same seed
//! produces byte-identical JSON and CSV.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{LabelScheme, VPTDataset};
use crate::learning::{evaluate, train, LearnError, ReferenceModel, TrainConfig, TrainSet};
use crate::pipeline::{plan_bayesian, plan_vision, PipelineError};
use crate::rng::{mix_seed, SplitMix64};
use crate::scene::{
    ground_truth_outcome, place_objects_random, render_scene, GraspConfiguration, Scene, World,
    GRASP_ANGLES_DEG,
};
use crate::shake::{
    endurance_score, sample_scenarios, simulate_shake, CategoryMix, ShakeProtocol,
};
use crate::tactile::grasp_score;

/// Realized scores strictly above this count as successful grasps.
pub const SUCCESS_THRESHOLD: f64 = 0.85;
/// Minimum sample count for a stable rank correlation.
pub const MIN_BENCHMARK_SAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("benchmark needs at least {MIN_BENCHMARK_SAMPLES} scenarios, got {0}")]
    TooFewSamples(usize),
    #[error("dataset too small: {got} records, need at least {need}")]
    DatasetTooSmall { got: usize, need: usize },
    #[error("split by object {object:?} left the {side} side empty")]
    EmptySplit { object: String, side: &'static str },
    #[error("trials per object must be >= 1")]
    NoTrials,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Shake(#[from] crate::shake::ShakeError),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

/// Which planner a trial ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Bayesian,
    Vision,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Bayesian => "bayesian",
            Policy::Vision => "vision",
        }
    }
}

/// The three trained models the policies share and differ on.
#[derive(Debug, Clone)]
pub struct PolicyModels {
    pub region: ReferenceModel,
    pub stable: ReferenceModel,
    pub vision: ReferenceModel,
}

/// Outcome of one simulated grasp trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub object_id: String,
    pub policy: Policy,
    pub planned: Option<GraspConfiguration>,
    pub plan_error: Option<String>,
    pub realized_score: f64,
    pub success: bool,
    pub seed: u64,
}

/// Runs one trial: place the object (seeded), plan, execute via the oracle
/// and the shake simulator, score. Planning errors are recorded as failed
/// trials with score zero, not raised.
pub fn run_trial(
    world: &World,
    object_index: usize,
    policy: Policy,
    models: &PolicyModels,
    seed: u64,
) -> Result<TrialOutcome, HarnessError> {
    let object = &world.objects[object_index];
    let scene_seed = mix_seed(seed, &[0]);
    let plan_seed = mix_seed(seed, &[1]);
    let oracle_seed = mix_seed(seed, &[2]);

    let poses = place_objects_random(std::slice::from_ref(object), scene_seed)?;
    let scene = render_scene(&world.objects, &poses)?;

    let planned = match policy {
        Policy::Bayesian => plan_bayesian(&scene.image, &models.region, &models.stable, plan_seed),
        Policy::Vision => plan_vision(&scene.image, &models.region, &models.vision, plan_seed),
    };

    Ok(match planned {
        Ok(plan) => {
            let scenario = ground_truth_outcome(&scene, &plan.config, &world.oracle, oracle_seed);
            let score = grasp_score(&simulate_shake(&scenario).image, &world.metric).value();
            TrialOutcome {
                object_id: object.id.clone(),
                policy,
                planned: Some(plan.config),
                plan_error: None,
                realized_score: score,
                success: score > SUCCESS_THRESHOLD,
                seed,
            }
        }
        Err(e) => TrialOutcome {
            object_id: object.id.clone(),
            policy,
            planned: None,
            plan_error: Some(plan_error_kind(&e).to_string()),
            realized_score: 0.0,
            success: false,
            seed,
        },
    })
}

fn plan_error_kind(e: &PipelineError) -> &'static str {
    match e {
        PipelineError::NoGraspableRegion => "no_graspable_region",
        PipelineError::NoStableConfiguration => "no_stable_configuration",
        PipelineError::SceneTooSmall { .. } => "scene_too_small",
    }
}

/// Per-object slice of the policy comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectComparison {
    pub object_id: String,
    pub trials: usize,
    pub bayesian_successes: usize,
    pub bayesian_rate: f64,
    pub vision_successes: usize,
    pub vision_rate: f64,
    /// Absolute gain in success rate, bayesian minus vision.
    pub point_gain: f64,
    /// (bayesian - vision) / vision; absent when the vision rate is zero.
    pub relative_improvement: Option<f64>,
}

/// The policy comparison over all objects, with the three aggregations:
/// per-object rates, mean absolute point gain, mean relative improvement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub trials_per_object: usize,
    pub seed: u64,
    pub per_object: Vec<ObjectComparison>,
    pub mean_bayesian_rate: f64,
    pub mean_vision_rate: f64,
    pub mean_point_gain: f64,
    pub mean_relative_improvement: Option<f64>,
}

/// Runs the paired policy comparison: for each object and trial index both
/// policies see the identical scene (the trial seed depends only on the
/// object and index). Deterministic given the seed.
pub fn run_comparison(
    world: &World,
    models: &PolicyModels,
    trials_per_object: usize,
    seed: u64,
) -> Result<ComparisonReport, HarnessError> {
    if trials_per_object == 0 {
        return Err(HarnessError::NoTrials);
    }
    let mut per_object = Vec::with_capacity(world.objects.len());
    for (object_index, object) in world.objects.iter().enumerate() {
        let mut bayes = 0usize;
        let mut vision = 0usize;
        for trial in 0..trials_per_object {
            let trial_seed = mix_seed(seed, &[object_index as u64, trial as u64]);
            let b = run_trial(world, object_index, Policy::Bayesian, models, trial_seed)?;
            let v = run_trial(world, object_index, Policy::Vision, models, trial_seed)?;
            bayes += b.success as usize;
            vision += v.success as usize;
        }
        let bayesian_rate = bayes as f64 / trials_per_object as f64;
        let vision_rate = vision as f64 / trials_per_object as f64;
        per_object.push(ObjectComparison {
            object_id: object.id.clone(),
            trials: trials_per_object,
            bayesian_successes: bayes,
            bayesian_rate,
            vision_successes: vision,
            vision_rate,
            point_gain: bayesian_rate - vision_rate,
            relative_improvement: (vision_rate > 0.0)
                .then(|| (bayesian_rate - vision_rate) / vision_rate),
        });
    }

    let n = per_object.len() as f64;
    let mean_bayesian_rate = per_object.iter().map(|o| o.bayesian_rate).sum::<f64>() / n;
    let mean_vision_rate = per_object.iter().map(|o| o.vision_rate).sum::<f64>() / n;
    let defined: Vec<f64> = per_object.iter().filter_map(|o| o.relative_improvement).collect();
    let mean_relative_improvement = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(ComparisonReport {
        trials_per_object,
        seed,
        per_object,
        mean_bayesian_rate,
        mean_vision_rate,
        mean_point_gain: mean_bayesian_rate - mean_vision_rate,
        mean_relative_improvement,
    })
}

impl ComparisonReport {
    pub fn to_table_csv(&self) -> String {
        let mut csv = String::from("object,policy,trials,successes,rate\n");
        for o in &self.per_object {
            csv.push_str(&format!(
                "{},bayesian,{},{},{}\n",
                o.object_id, o.trials, o.bayesian_successes, o.bayesian_rate
            ));
            csv.push_str(&format!(
                "{},vision,{},{},{}\n",
                o.object_id, o.trials, o.vision_successes, o.vision_rate
            ));
        }
        csv
    }

    /// Writes `summary.json` and `table.csv` into the directory.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let summary = serde_json::to_string_pretty(self)
            .map_err(|source| HarnessError::Json { context: "serializing summary".into(), source })?;
        let summary_path = dir.join("summary.json");
        fs::write(&summary_path, summary + "\n").map_err(io_err(&summary_path))?;
        let table_path = dir.join("table.csv");
        fs::write(&table_path, self.to_table_csv()).map_err(io_err(&table_path))?;
        Ok(())
    }
}

/// Average ranks (1-based), ties sharing the mean of their rank range.
fn average_ranks(values: &[f64]) -> (Vec<f64>, bool) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut had_ties = false;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        if j > i {
            had_ties = true;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &index in &order[i..=j] {
            ranks[index] = mean_rank;
        }
        i = j + 1;
    }
    (ranks, had_ties)
}

/// Spearman rank correlation with average-rank ties. Returns the
/// coefficient and a degeneracy flag; a constant side is reported as
/// (0, degenerate). Tie-free inputs use the exact sum-of-squared-rank-
/// differences form, so identical orderings give exactly 1.0.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> (f64, bool) {
    assert_eq!(xs.len(), ys.len(), "paired samples required");
    let n = xs.len();
    if n < 2 {
        return (0.0, true);
    }
    let (rx, ties_x) = average_ranks(xs);
    let (ry, ties_y) = average_ranks(ys);
    let constant = |r: &[f64]| r.iter().all(|&v| v == r[0]);
    if constant(&rx) || constant(&ry) {
        return (0.0, true);
    }
    if !ties_x && !ties_y {
        let d2: f64 = rx.iter().zip(ry.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let nf = n as f64;
        return (1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0)), false);
    }
    // Pearson on ranks for the tied case.
    let nf = n as f64;
    let mean_x = rx.iter().sum::<f64>() / nf;
    let mean_y = ry.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    (cov / (var_x.sqrt() * var_y.sqrt()), false)
}

/// Paired (grasp score, endurance score) samples and their rank agreement.
#[derive(Debug, Clone, Serialize)]
pub struct MetricBenchmark {
    pub pairs: Vec<(f64, f64)>,
    pub spearman_rho: f64,
    pub degenerate: bool,
}

impl MetricBenchmark {
    /// Plot-ready CSV: one (grasp score, endurance score) pair per line.
    pub fn to_pairs_csv(&self) -> String {
        let mut csv = String::from("grasp_score,endurance_score\n");
        for (g, e) in &self.pairs {
            csv.push_str(&format!("{g},{e}\n"));
        }
        csv
    }
}

/// Samples scenarios, scores each with both metrics, and correlates the
/// rankings. Needs at least 10 scenarios for a stable coefficient.
pub fn benchmark_metric(
    n: usize,
    mix: &CategoryMix,
    seed: u64,
    world: &World,
) -> Result<MetricBenchmark, HarnessError> {
    if n < MIN_BENCHMARK_SAMPLES {
        return Err(HarnessError::TooFewSamples(n));
    }
    let protocol = ShakeProtocol::default();
    let scenarios = sample_scenarios(n, mix, seed)?;
    let mut pairs = Vec::with_capacity(n);
    for scenario in &scenarios {
        let score = grasp_score(&simulate_shake(scenario).image, &world.metric).value();
        pairs.push((score, endurance_score(scenario, &protocol)));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (rho, degenerate) = spearman_rho(&xs, &ys);
    Ok(MetricBenchmark { pairs, spearman_rho: rho, degenerate })
}

/// Accuracy of one label scheme on the stratified 80/20 split.
#[derive(Debug, Clone, Serialize)]
pub struct AccuracyReport {
    pub scheme: LabelScheme,
    pub train_accuracy: f64,
    pub heldout_accuracy: f64,
    pub per_object_heldout: Vec<(String, f64, usize)>,
    pub train_records: usize,
    pub heldout_records: usize,
    pub first_epoch_loss: f64,
    pub last_epoch_loss: f64,
}

/// Groups record indices by source trial so a record and its 180-degree
/// twin always land on the same split side.
fn trial_groups(dataset: &VPTDataset, object_id: &str) -> Vec<Vec<usize>> {
    let mut groups: std::collections::BTreeMap<u32, Vec<usize>> = std::collections::BTreeMap::new();
    for (index, record) in dataset.records.iter().enumerate() {
        if record.object_id == object_id {
            groups.entry(record.trial).or_default().push(index);
        }
    }
    groups.into_values().collect()
}

/// Seeded 80/20 split stratified by object; augmented twins stay with
/// their originals. Returns (train indices, heldout indices).
pub fn stratified_split(dataset: &VPTDataset, split_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut heldout = Vec::new();
    for (object_index, object_id) in dataset.manifest.objects.iter().enumerate() {
        let mut groups = trial_groups(dataset, object_id);
        let mut rng = SplitMix64::new(mix_seed(split_seed, &[object_index as u64]));
        rng.shuffle(&mut groups);
        let cut = (groups.len() * 4) / 5;
        for (i, group) in groups.into_iter().enumerate() {
            if i < cut {
                train.extend(group);
            } else {
                heldout.extend(group);
            }
        }
    }
    train.sort_unstable();
    heldout.sort_unstable();
    (train, heldout)
}

/// Trains the scheme's preset on the 80% side and reports overall and
/// per-object held-out accuracy.
pub fn run_accuracy(
    dataset: &VPTDataset,
    scheme: LabelScheme,
    split_seed: u64,
) -> Result<AccuracyReport, HarnessError> {
    if dataset.records.len() < 100 {
        return Err(HarnessError::DatasetTooSmall { got: dataset.records.len(), need: 100 });
    }
    let (train_idx, heldout_idx) = stratified_split(dataset, split_seed);
    if train_idx.is_empty() {
        return Err(HarnessError::EmptySplit { object: "<all>".into(), side: "train" });
    }
    if heldout_idx.is_empty() {
        return Err(HarnessError::EmptySplit { object: "<all>".into(), side: "heldout" });
    }

    let train_set = TrainSet::from_dataset_indices(dataset, scheme, &train_idx)?;
    let heldout_set = TrainSet::from_dataset_indices(dataset, scheme, &heldout_idx)?;
    let config = TrainConfig::preset(scheme, split_seed);
    let (model, report) = train(&train_set, Some(&heldout_set), &config)?;

    let mut per_object_heldout = Vec::new();
    for object_id in &dataset.manifest.objects {
        let object_idx: Vec<usize> = heldout_idx
            .iter()
            .copied()
            .filter(|&i| &dataset.records[i].object_id == object_id)
            .collect();
        if object_idx.is_empty() {
            continue;
        }
        let object_set = TrainSet::from_dataset_indices(dataset, scheme, &object_idx)?;
        let eval = evaluate(&model, &object_set)?;
        per_object_heldout.push((object_id.clone(), eval.accuracy, object_idx.len()));
    }

    Ok(AccuracyReport {
        scheme,
        train_accuracy: report.final_train_accuracy,
        heldout_accuracy: report.final_heldout_accuracy.expect("heldout side is nonempty"),
        per_object_heldout,
        train_records: train_idx.len(),
        heldout_records: heldout_idx.len(),
        first_epoch_loss: *report.epoch_mean_loss.first().expect("at least one epoch"),
        last_epoch_loss: *report.epoch_mean_loss.last().expect("at least one epoch"),
    })
}

/// Leave-one-object-out accuracy: for each object, train the scheme preset
/// on every other object and evaluate on the held-out one.
pub fn run_novel_object_accuracy(
    dataset: &VPTDataset,
    scheme: LabelScheme,
    seed: u64,
) -> Result<Vec<(String, f64)>, HarnessError> {
    let mut results = Vec::new();
    for object_id in &dataset.manifest.objects {
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for (index, record) in dataset.records.iter().enumerate() {
            if &record.object_id == object_id {
                test_idx.push(index);
            } else {
                train_idx.push(index);
            }
        }
        if train_idx.is_empty() {
            return Err(HarnessError::EmptySplit { object: object_id.clone(), side: "train" });
        }
        if test_idx.is_empty() {
            return Err(HarnessError::EmptySplit { object: object_id.clone(), side: "heldout" });
        }
        let train_set = TrainSet::from_dataset_indices(dataset, scheme, &train_idx)?;
        let test_set = TrainSet::from_dataset_indices(dataset, scheme, &test_idx)?;
        let config = TrainConfig::preset(scheme, seed);
        let (model, _) = train(&train_set, None, &config)?;
        let eval = evaluate(&model, &test_set)?;
        results.push((object_id.clone(), eval.accuracy));
    }
    Ok(results)
}

/// Exhaustively scans every candidate window's 54-configuration grid and
/// returns the configuration with the best noiseless oracle score.
/// A reference answer for tests and diagnostics, not part of any policy.
pub fn oracle_best_config(world: &World, scene: &Scene) -> Option<(GraspConfiguration, f64)> {
    let windows = crate::pipeline::candidate_windows(&scene.image).ok()?;
    let params = world.oracle.clone().noiseless();
    let mut best: Option<(GraspConfiguration, f64)> = None;
    for window in windows {
        for &dy in &crate::pipeline::CENTER_OFFSETS {
            for &dx in &crate::pipeline::CENTER_OFFSETS {
                for &angle in &GRASP_ANGLES_DEG {
                    let config = GraspConfiguration {
                        u: (window.x + dx) as i32,
                        v: (window.y + dy) as i32,
                        angle_deg: angle,
                    };
                    let scenario = ground_truth_outcome(scene, &config, &params, 0);
                    let score = grasp_score(&simulate_shake(&scenario).image, &world.metric).value();
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((config, score));
                    }
                }
            }
        }
    }
    best
}

/// Noiseless realized score of a configuration, through the full
/// oracle -> simulate -> metric path.
pub fn noiseless_score(world: &World, scene: &Scene, config: &GraspConfiguration) -> f64 {
    let params = world.oracle.clone().noiseless();
    let scenario = ground_truth_outcome(scene, config, &params, 0);
    grasp_score(&simulate_shake(&scenario).image, &world.metric).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_identical_orderings_exact_one() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.5];
        let ys = [10.0, 20.0, 30.0, 40.0, 55.0];
        let (rho, degenerate) = spearman_rho(&xs, &ys);
        assert_eq!(rho, 1.0);
        assert!(!degenerate);
    }

    #[test]
    fn spearman_reversed_is_minus_one() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [4.0, 3.0, 2.0, 1.0];
        let (rho, _) = spearman_rho(&xs, &ys);
        assert_eq!(rho, -1.0);
    }

    #[test]
    fn spearman_all_ties_degenerate_zero() {
        let xs = [2.0, 2.0, 2.0];
        let ys = [1.0, 5.0, 9.0];
        let (rho, degenerate) = spearman_rho(&xs, &ys);
        assert_eq!(rho, 0.0);
        assert!(degenerate);
    }

    #[test]
    fn spearman_handles_partial_ties() {
        // Monotone with a tie on one side stays close to 1.
        let xs = [1.0, 2.0, 2.0, 3.0];
        let ys = [1.0, 2.0, 3.0, 4.0];
        let (rho, degenerate) = spearman_rho(&xs, &ys);
        assert!(!degenerate);
        assert!(rho > 0.9 && rho <= 1.0, "rho {rho}");
    }

    #[test]
    fn average_ranks_with_ties() {
        let (ranks, ties) = average_ranks(&[10.0, 20.0, 20.0, 30.0]);
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
        assert!(ties);
    }

    #[test]
    fn benchmark_noiseless_all_slip_is_exactly_one() {
        let world = World::known();
        let mut bench = {
            // Noiseless variant: re-sample and zero the noise.
            let scenarios = sample_scenarios(100, &CategoryMix::all_slip(), 7).unwrap();
            let protocol = ShakeProtocol::default();
            let mut pairs = Vec::new();
            for s in &scenarios {
                let s = s.clone().with_noise(0.0);
                let score = grasp_score(&simulate_shake(&s).image, &world.metric).value();
                pairs.push((score, endurance_score(&s, &protocol)));
            }
            let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let (rho, degenerate) = spearman_rho(&xs, &ys);
            MetricBenchmark { pairs, spearman_rho: rho, degenerate }
        };
        assert_eq!(bench.spearman_rho, 1.0);
        assert!(!bench.degenerate);
        bench.pairs.truncate(2);
        let csv = bench.to_pairs_csv();
        assert!(csv.starts_with("grasp_score,endurance_score\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn benchmark_rejects_tiny_n() {
        let world = World::known();
        assert!(matches!(
            benchmark_metric(5, &CategoryMix::default(), 1, &world),
            Err(HarnessError::TooFewSamples(5))
        ));
    }

    #[test]
    fn benchmark_deterministic() {
        let world = World::known();
        let a = benchmark_metric(50, &CategoryMix::default(), 9, &world).unwrap();
        let b = benchmark_metric(50, &CategoryMix::default(), 9, &world).unwrap();
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(a.spearman_rho, b.spearman_rho);
    }

    #[test]
    fn stratified_split_keeps_twins_together() {
        let world = World::known();
        let dataset = crate::dataset::build_vpt(&world, 10, 3).unwrap();
        let (train, heldout) = stratified_split(&dataset, 7);
        assert_eq!(train.len() + heldout.len(), dataset.records.len());
        // A record and its augmented twin share a trial and object; verify
        // no (object, trial) pair is split across sides.
        let key = |i: usize| {
            let r = &dataset.records[i];
            (r.object_id.clone(), r.trial)
        };
        let train_keys: std::collections::HashSet<_> = train.iter().map(|&i| key(i)).collect();
        for &i in &heldout {
            assert!(!train_keys.contains(&key(i)), "trial split across sides");
        }
        // Both sides see every object.
        for object in &dataset.manifest.objects {
            assert!(train.iter().any(|&i| &dataset.records[i].object_id == object));
            assert!(heldout.iter().any(|&i| &dataset.records[i].object_id == object));
        }
    }

    #[test]
    fn comparison_identical_models_zero_gap() {
        let world = World::known();
        let model = ReferenceModel { weights: [0.0; crate::learning::FEATURES], bias: 1.0 };
        let models =
            PolicyModels { region: model.clone(), stable: model.clone(), vision: model };
        let report = run_comparison(&world, &models, 3, 11).unwrap();
        for o in &report.per_object {
            assert_eq!(o.bayesian_rate, o.vision_rate, "object {}", o.object_id);
            assert_eq!(o.point_gain, 0.0);
        }
        assert_eq!(report.mean_point_gain, 0.0);
    }

    #[test]
    fn comparison_report_round_trips_and_writes() {
        let world = World::known();
        let model = ReferenceModel { weights: [0.0; crate::learning::FEATURES], bias: 1.0 };
        let models =
            PolicyModels { region: model.clone(), stable: model.clone(), vision: model };
        let report = run_comparison(&world, &models, 2, 5).unwrap();
        let dir = std::env::temp_dir().join(format!("graspkit-report-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        report.write(&dir).unwrap();
        let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
        let parsed: ComparisonReport = serde_json::from_str(&summary).unwrap();
        assert_eq!(parsed, report);
        let table = fs::read_to_string(dir.join("table.csv")).unwrap();
        assert!(table.starts_with("object,policy,trials,successes,rate\n"));
        assert_eq!(table.lines().count(), 1 + 2 * world.objects.len());
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn trial_failure_policy_scores_zero() {
        let world = World::known();
        // A region model that rejects everything: planning always fails.
        let negative = ReferenceModel { weights: [0.0; crate::learning::FEATURES], bias: -1.0 };
        let models = PolicyModels {
            region: negative.clone(),
            stable: negative.clone(),
            vision: negative,
        };
        let outcome = run_trial(&world, 0, Policy::Bayesian, &models, 3).unwrap();
        assert!(!outcome.success);
        assert_eq!(outcome.realized_score, 0.0);
        assert_eq!(outcome.plan_error.as_deref(), Some("no_graspable_region"));
        // Determinism.
        let again = run_trial(&world, 0, Policy::Bayesian, &models, 3).unwrap();
        assert_eq!(outcome, again);
    }

    #[test]
    fn per_object_accuracies_average_to_overall() {
        let world = World::known();
        let dataset = crate::dataset::build_vpt(&world, 20, 3).unwrap();
        let report = run_accuracy(&dataset, LabelScheme::Scg, 5).unwrap();
        let total: usize = report.per_object_heldout.iter().map(|(_, _, n)| n).sum();
        assert_eq!(total, report.heldout_records);
        let weighted: f64 = report
            .per_object_heldout
            .iter()
            .map(|(_, acc, n)| acc * *n as f64)
            .sum::<f64>()
            / total as f64;
        assert!((weighted - report.heldout_accuracy).abs() < 1e-12);
    }

    #[test]
    fn oracle_best_config_finds_stable_grasp_for_every_preset() {
        let world = World::known();
        for (index, object) in world.objects.iter().enumerate() {
            for seed in [3u64, 17, 40] {
                let poses =
                    place_objects_random(std::slice::from_ref(object), mix_seed(seed, &[index as u64]))
                        .unwrap();
                let scene = render_scene(&world.objects, &poses).unwrap();
                let (config, score) = oracle_best_config(&world, &scene).unwrap();
                assert!(
                    score > 0.85,
                    "object {} seed {seed}: best grid config {config:?} scored {score}",
                    object.id
                );
            }
        }
    }
}
