//! Binary patch classification behind a pluggable interface.
//!
//! The pipeline only needs `patch -> probability`, expressed by
//! [`PatchClassifier`] so heavier backbones can be swapped in later. The
//! shipped [`ReferenceModel`] is deliberately small: logistic regression on
//! a 10x10 grid of block-mean features (101 weights including bias),
//! trained by deterministic mini-batch gradient descent on the summed
//! cross-entropy loss. The objective is convex, so zero initialization
//! plus a seeded shuffle makes training bit-reproducible.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{content_hash, project_labels, LabelScheme, VPTDataset, PATCH_SIZE};
use crate::raster::GrayImage;
use crate::rng::SplitMix64;

/// Features per patch: a 10x10 grid of 10x10-pixel block means.
pub const FEATURES: usize = 100;
/// Pixels per block side.
pub const BLOCK: usize = PATCH_SIZE / 10;
/// Predicted probabilities are clamped to [EPS, 1 - EPS] inside the loss.
pub const PROBABILITY_EPS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("patch must be {PATCH_SIZE}x{PATCH_SIZE}, got {width}x{height}")]
    BadPatch { width: usize, height: usize },
    #[error("training view is empty")]
    EmptyView,
    #[error("invalid train config: {0}")]
    BadConfig(String),
    #[error("model file {path}: {message}")]
    BadModel { path: String, message: String },
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

/// Anything that maps a 100x100 patch to a stable-grasp probability.
pub trait PatchClassifier {
    fn predict_patch(&self, patch: &GrayImage) -> f64;
    fn kind(&self) -> &'static str;
}

/// Decision rule shared by every consumer: probabilities at or above 0.5
/// are positive, so the zero-initialized model has defined behavior.
pub fn is_positive(probability: f64) -> bool {
    probability >= 0.5
}

/// Block-mean features in [0, 1], row-major over the 10x10 block grid.
pub fn pool_features(patch: &GrayImage) -> Result<[f64; FEATURES], LearnError> {
    if patch.width() != PATCH_SIZE || patch.height() != PATCH_SIZE {
        return Err(LearnError::BadPatch { width: patch.width(), height: patch.height() });
    }
    let mut features = [0.0; FEATURES];
    for (index, feature) in features.iter_mut().enumerate() {
        let bx = (index % 10) * BLOCK;
        let by = (index / 10) * BLOCK;
        let mut sum = 0u32;
        for y in by..by + BLOCK {
            for x in bx..bx + BLOCK {
                sum += patch.pixel(x, y) as u32;
            }
        }
        *feature = sum as f64 / (BLOCK * BLOCK) as f64 / 255.0;
    }
    Ok(features)
}

/// Logistic regression over block features: 100 weights plus a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    pub weights: [f64; FEATURES],
    pub bias: f64,
}

impl Default for ReferenceModel {
    fn default() -> Self {
        Self { weights: [0.0; FEATURES], bias: 0.0 }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ReferenceModel {
    pub fn predict_features(&self, features: &[f64; FEATURES]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(features.iter())
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

impl PatchClassifier for ReferenceModel {
    fn predict_patch(&self, patch: &GrayImage) -> f64 {
        let features = pool_features(patch).expect("classifier input must be a 100x100 patch");
        self.predict_features(&features)
    }

    fn kind(&self) -> &'static str {
        "reference_logistic"
    }
}

/// Probability for a patch; positive iff `is_positive` holds.
pub fn predict(model: &ReferenceModel, patch: &GrayImage) -> Result<f64, LearnError> {
    let features = pool_features(patch)?;
    Ok(model.predict_features(&features))
}

/// A labeled feature set ready for training or evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    pub features: Vec<[f64; FEATURES]>,
    pub labels: Vec<u8>,
}

impl TrainSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn from_patches<'a, I>(items: I) -> Result<TrainSet, LearnError>
    where
        I: IntoIterator<Item = (&'a GrayImage, u8)>,
    {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (patch, label) in items {
            features.push(pool_features(patch)?);
            labels.push(label);
        }
        Ok(TrainSet { features, labels })
    }

    /// Pools the whole dataset under a label scheme, in record order.
    pub fn from_dataset(dataset: &VPTDataset, scheme: LabelScheme) -> Result<TrainSet, LearnError> {
        Self::from_patches(project_labels(dataset, scheme).into_iter().map(|(r, l)| (&r.patch, l)))
    }

    /// Pools a subset of records by index, in the given order.
    pub fn from_dataset_indices(
        dataset: &VPTDataset,
        scheme: LabelScheme,
        indices: &[usize],
    ) -> Result<TrainSet, LearnError> {
        Self::from_patches(
            indices
                .iter()
                .map(|&i| (&dataset.records[i].patch, scheme.label(dataset.records[i].score))),
        )
    }
}

/// Mini-batch gradient descent settings. The presets carry the batch sizes
/// the three label schemes are trained with (20 for region labels, 25 for
/// the other two), 165 epochs and learning rate 0.01.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub preset: LabelScheme,
}

impl TrainConfig {
    pub fn preset(scheme: LabelScheme, seed: u64) -> TrainConfig {
        let batch_size = match scheme {
            LabelScheme::Gre => 20,
            LabelScheme::Scg | LabelScheme::VisionBaseline => 25,
        };
        TrainConfig { batch_size, epochs: 165, learning_rate: 0.01, seed, preset: scheme }
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.batch_size < 1 {
            return Err(LearnError::BadConfig("batch size must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(LearnError::BadConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(LearnError::BadConfig("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Training trace and final quality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean loss over the training set after each epoch.
    pub epoch_mean_loss: Vec<f64>,
    pub final_train_accuracy: f64,
    pub final_heldout_accuracy: Option<f64>,
    pub wall_seconds: f64,
    /// Set when one of the two labels was absent from the training view.
    pub single_class_warning: bool,
}

/// Clamped probability and its raw sigmoid, shared by loss and gradient so
/// the analytic gradient matches finite differences of the actual loss.
fn clamped_probability(model: &ReferenceModel, features: &[f64; FEATURES]) -> (f64, bool) {
    let p = model.predict_features(features);
    if p < PROBABILITY_EPS {
        (PROBABILITY_EPS, true)
    } else if p > 1.0 - PROBABILITY_EPS {
        (1.0 - PROBABILITY_EPS, true)
    } else {
        (p, false)
    }
}

/// Summed cross-entropy over the set: sum of -[s ln p + (1-s) ln(1-p)]
/// with p clamped away from 0 and 1.
pub fn loss(model: &ReferenceModel, set: &TrainSet) -> f64 {
    set.features
        .iter()
        .zip(set.labels.iter())
        .map(|(x, &s)| {
            let (p, _) = clamped_probability(model, x);
            let s = s as f64;
            -(s * p.ln() + (1.0 - s) * (1.0 - p).ln())
        })
        .sum()
}

/// Gradient of the summed loss over a batch, with respect to all 101
/// weights. Within the clamp region the loss is flat and the gradient
/// contribution is zero.
fn batch_gradient(
    model: &ReferenceModel,
    features: &[[f64; FEATURES]],
    labels: &[u8],
) -> ([f64; FEATURES], f64) {
    let mut grad_w = [0.0; FEATURES];
    let mut grad_b = 0.0;
    for (x, &s) in features.iter().zip(labels.iter()) {
        let (p, clamped) = clamped_probability(model, x);
        if clamped {
            continue;
        }
        let delta = p - s as f64;
        for (g, xi) in grad_w.iter_mut().zip(x.iter()) {
            *g += delta * xi;
        }
        grad_b += delta;
    }
    (grad_w, grad_b)
}

/// Trains from zero-initialized weights: per epoch a seeded shuffle, then
/// one averaged gradient step per mini-batch. Deterministic given (set,
/// config); an optional held-out set is only evaluated, never trained on.
pub fn train(
    set: &TrainSet,
    heldout: Option<&TrainSet>,
    config: &TrainConfig,
) -> Result<(ReferenceModel, TrainReport), LearnError> {
    config.validate()?;
    if set.is_empty() {
        return Err(LearnError::EmptyView);
    }
    let start = std::time::Instant::now();
    let single_class_warning =
        set.labels.iter().all(|&l| l == 0) || set.labels.iter().all(|&l| l == 1);

    let mut model = ReferenceModel::default();
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut rng = SplitMix64::new(config.seed);
    let mut epoch_mean_loss = Vec::with_capacity(config.epochs);

    let mut batch_features: Vec<[f64; FEATURES]> = Vec::with_capacity(config.batch_size);
    let mut batch_labels: Vec<u8> = Vec::with_capacity(config.batch_size);

    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(config.batch_size) {
            batch_features.clear();
            batch_labels.clear();
            for &i in chunk {
                batch_features.push(set.features[i]);
                batch_labels.push(set.labels[i]);
            }
            let (grad_w, grad_b) = batch_gradient(&model, &batch_features, &batch_labels);
            let scale = config.learning_rate / chunk.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(grad_w.iter()) {
                *w -= scale * g;
            }
            model.bias -= scale * grad_b;
        }
        epoch_mean_loss.push(loss(&model, set) / set.len() as f64);
    }

    let final_train_accuracy = evaluate(&model, set)?.accuracy;
    let final_heldout_accuracy = match heldout {
        Some(h) if !h.is_empty() => Some(evaluate(&model, h)?.accuracy),
        _ => None,
    };
    let report = TrainReport {
        epoch_mean_loss,
        final_train_accuracy,
        final_heldout_accuracy,
        wall_seconds: start.elapsed().as_secs_f64(),
        single_class_warning,
    };
    Ok((model, report))
}

/// Accuracy plus confusion counts under the `p >= 0.5` decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl Evaluation {
    pub fn total(&self) -> usize {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

pub fn evaluate(model: &ReferenceModel, set: &TrainSet) -> Result<Evaluation, LearnError> {
    if set.is_empty() {
        return Err(LearnError::EmptyView);
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (x, &s) in set.features.iter().zip(set.labels.iter()) {
        let positive = is_positive(model.predict_features(x));
        match (positive, s) {
            (true, 1) => tp += 1,
            (false, 0) => tn += 1,
            (true, 0) => fp += 1,
            (false, 1) => fn_ += 1,
            _ => unreachable!("labels are binary"),
        }
    }
    Ok(Evaluation {
        accuracy: (tp + tn) as f64 / set.len() as f64,
        true_positives: tp,
        true_negatives: tn,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// Compares the analytic gradient of the single-sample loss against central
/// finite differences (h = 1e-5) over all 101 weights and returns the worst
/// relative error (absolute error where both are near zero).
pub fn gradient_check(model: &ReferenceModel, features: &[f64; FEATURES], label: u8) -> f64 {
    const H: f64 = 1e-5;
    let single = TrainSet { features: vec![*features], labels: vec![label] };
    let (analytic_w, analytic_b) = batch_gradient(model, &single.features, &single.labels);

    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, perturb: &mut dyn FnMut(&mut ReferenceModel, f64)| {
        let mut plus = model.clone();
        perturb(&mut plus, H);
        let mut minus = model.clone();
        perturb(&mut minus, -H);
        let numeric = (loss(&plus, &single) - loss(&minus, &single)) / (2.0 * H);
        let denom = analytic.abs().max(numeric.abs());
        let err = if denom < 1e-8 {
            (analytic - numeric).abs()
        } else {
            (analytic - numeric).abs() / denom
        };
        worst = worst.max(err);
    };

    #[allow(clippy::needless_range_loop)] // the index feeds the perturbation closure
    for i in 0..FEATURES {
        check(analytic_w[i], &mut |m, h| m.weights[i] += h);
    }
    check(analytic_b, &mut |m, h| m.bias += h);
    worst
}

/// On-disk model format: kind tag, label preset, the 101 weights (bias
/// last), and the training manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub kind: String,
    pub preset: LabelScheme,
    pub weights: Vec<f64>,
    pub training: TrainingManifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub config: TrainConfig,
    pub dataset_hash: String,
}

pub fn save_model(
    model: &ReferenceModel,
    config: &TrainConfig,
    dataset: &VPTDataset,
    path: &Path,
) -> Result<(), LearnError> {
    let mut weights: Vec<f64> = model.weights.to_vec();
    weights.push(model.bias);
    let saved = SavedModel {
        kind: model.kind().to_string(),
        preset: config.preset,
        weights,
        training: TrainingManifest {
            config: *config,
            dataset_hash: format!("{:016x}", content_hash(dataset)),
        },
    };
    let json = serde_json::to_string_pretty(&saved)
        .map_err(|source| LearnError::Json { context: "serializing model".into(), source })?;
    fs::write(path, json + "\n")
        .map_err(|source| LearnError::Io { path: path.display().to_string(), source })
}

pub fn load_model(path: &Path) -> Result<(ReferenceModel, SavedModel), LearnError> {
    let text = fs::read_to_string(path)
        .map_err(|source| LearnError::Io { path: path.display().to_string(), source })?;
    let saved: SavedModel = serde_json::from_str(&text).map_err(|source| LearnError::Json {
        context: format!("parsing model file {}", path.display()),
        source,
    })?;
    if saved.kind != "reference_logistic" {
        return Err(LearnError::BadModel {
            path: path.display().to_string(),
            message: format!("unsupported model kind {:?}", saved.kind),
        });
    }
    if saved.weights.len() != FEATURES + 1 {
        return Err(LearnError::BadModel {
            path: path.display().to_string(),
            message: format!("expected {} weights, got {}", FEATURES + 1, saved.weights.len()),
        });
    }
    if saved.weights.iter().any(|w| !w.is_finite()) {
        return Err(LearnError::BadModel {
            path: path.display().to_string(),
            message: "weights must be finite".into(),
        });
    }
    let mut model = ReferenceModel::default();
    model.weights.copy_from_slice(&saved.weights[..FEATURES]);
    model.bias = saved.weights[FEATURES];
    Ok((model, saved))
}
