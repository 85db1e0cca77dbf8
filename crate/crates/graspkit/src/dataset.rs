//! Self-supervised visual-tactile dataset: build, augment, label, persist.
//!
//! Each record pairs a 100x100 gripper-frame image patch with the grasp
//! score its simulated execution earned, labeled entirely without human
//! annotation: the oracle decides the physical outcome, the shake simulator
//! produces the tactile imprint, and the metric scores it. Every record is
//! duplicated once with the patch rotated 180 degrees, which leaves the
//! grasp quality of a two-finger grasp unchanged.
//!
//! On disk a dataset is a directory of four parts: `manifest.json`,
//! `records.jsonl` (one record's metadata per line), `patches/<id>.pgm`
//! and `tactile/<id>.csv`. Serialization is deterministic: the same build
//! seed produces byte-identical directories.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::GrayImage;
use crate::rng::{mix_seed, SplitMix64};
use crate::scene::{
    place_objects_random, render_scene, GraspConfiguration, Scene, World, GRASP_ANGLES_DEG,
    SCENE_HEIGHT, SCENE_WIDTH,
};
use crate::shake::{simulate_shake, ContactScenario, ScenarioMode};
use crate::tactile::{categorize, grasp_score, GraspScore, StabilityCategory, TactileImage};

/// Side length of an extracted patch.
pub const PATCH_SIZE: usize = 100;
/// Fill value for samples falling outside the scene.
pub const PATCH_PADDING: u8 = 200;
/// On-disk format version accepted by `load_dataset`.
pub const FORMAT_VERSION: u32 = 1;
/// Fraction of grasps sampled near the object (the rest are uniform).
pub const NEAR_FRACTION: f64 = 0.6;
/// Standard deviation, in pixels, of near-object grasp perturbations.
pub const NEAR_OFFSET_STD: f64 = 10.0;
/// Fraction of near-object grasps aimed at the object's preferred axis;
/// the rest draw their angle uniformly. Aimed attempts keep the stable
/// class populated for strict objects.
pub const NEAR_ANGLE_BIAS: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("record {id}: already augmented")]
    AlreadyAugmented { id: u32 },
    #[error("record {id}: {message}")]
    BadRecord { id: u32, message: String },
    #[error("manifest: {0}")]
    BadManifest(String),
    #[error("dataset build requires at least one object")]
    NoObjects,
    #[error("scene generation failed: {0}")]
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

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.display().to_string(), source }
}

/// Compact scenario description stored with each record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub mode: String,
    pub parameter: f64,
}

impl From<&ContactScenario> for ScenarioSummary {
    fn from(scenario: &ContactScenario) -> Self {
        match scenario.mode {
            ScenarioMode::NoContact => Self { mode: "nocontact".into(), parameter: 0.0 },
            ScenarioMode::FallAfter(k) => Self { mode: "fall".into(), parameter: k as f64 },
            ScenarioMode::Slip(m) => Self { mode: "slip".into(), parameter: m },
        }
    }
}

/// One self-supervised training example.
#[derive(Debug, Clone, PartialEq)]
pub struct VPTRecord {
    pub id: u32,
    pub object_id: String,
    /// Index of the grasp trial this record (or its augmented twin) came from.
    pub trial: u32,
    pub config: GraspConfiguration,
    pub patch: GrayImage,
    pub tactile: TactileImage,
    pub score: GraspScore,
    pub category: StabilityCategory,
    pub scenario: ScenarioSummary,
    pub augmented: bool,
    /// Pose of the object in the trial scene, for deterministic replay.
    pub pose_u: i32,
    pub pose_v: i32,
    pub pose_deg: f64,
    pub trial_seed: u64,
}

/// Metadata line persisted to records.jsonl; pixel and tactile payloads
/// live in sibling files keyed by record id.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordMeta {
    id: u32,
    object_id: String,
    trial: u32,
    u: i32,
    v: i32,
    a: u16,
    score: f64,
    category: StabilityCategory,
    mode: String,
    parameter: f64,
    augmented: bool,
    pose_u: i32,
    pose_v: i32,
    pose_deg: f64,
    trial_seed: u64,
    patch_hash: String,
    tactile_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub near_fraction: f64,
    pub near_offset_std: f64,
    pub near_angle_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub objects: Vec<String>,
    pub per_object: u32,
    pub total_records: u32,
    pub master_seed: u64,
    pub augmented: bool,
    pub sampling: SamplingParams,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VPTDataset {
    pub manifest: DatasetManifest,
    pub records: Vec<VPTRecord>,
}

/// Binary label projections of the grasp score. The three thresholds are
/// nested: every stable grasp is also a vision positive, and every vision
/// positive is a region positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    /// Region labels: 1 iff score > 0 (the grasp touched something).
    Gre,
    /// Stable-configuration labels: 1 iff score > 0.85.
    Scg,
    /// Vision-baseline labels: 1 iff score > 0.5 (drops visible, slip not).
    VisionBaseline,
}

impl LabelScheme {
    pub fn threshold(self) -> f64 {
        match self {
            LabelScheme::Gre => 0.0,
            LabelScheme::Scg => 0.85,
            LabelScheme::VisionBaseline => 0.5,
        }
    }

    /// 1 iff the score strictly exceeds the scheme threshold.
    pub fn label(self, score: GraspScore) -> u8 {
        u8::from(score.value() > self.threshold())
    }

    pub fn parse(s: &str) -> Option<LabelScheme> {
        match s {
            "gre" => Some(LabelScheme::Gre),
            "scg" => Some(LabelScheme::Scg),
            "vision" | "visionbaseline" => Some(LabelScheme::VisionBaseline),
            _ => None,
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LabelScheme::Gre => "gre",
            LabelScheme::Scg => "scg",
            LabelScheme::VisionBaseline => "vision",
        };
        f.write_str(name)
    }
}

/// Samples the scene on a 100x100 grid centered at (u, v) and rotated by
/// the negated grasp angle, so the gripper closing direction is horizontal
/// in the patch and the jaw axis vertical. Nearest-neighbor sampling;
/// points outside the scene read as background (200).
pub fn extract_patch(image: &GrayImage, config: &GraspConfiguration) -> GrayImage {
    let angle = config.angle_rad();
    let (sin, cos) = angle.sin_cos();
    let half = (PATCH_SIZE / 2) as f64;
    let mut pixels = Vec::with_capacity(PATCH_SIZE * PATCH_SIZE);
    for i in 0..PATCH_SIZE {
        let dy = i as f64 - half;
        for j in 0..PATCH_SIZE {
            let dx = j as f64 - half;
            let x = config.u as f64 + dx * cos - dy * sin;
            let y = config.v as f64 + dx * sin + dy * cos;
            let value = image
                .get(x.round() as i64, y.round() as i64)
                .unwrap_or(PATCH_PADDING);
            pixels.push(value);
        }
    }
    GrayImage::from_pixels(PATCH_SIZE, PATCH_SIZE, pixels).expect("patch dimensions are fixed")
}

/// The augmented twin of a record: patch rotated 180 degrees in place,
/// everything else (score, category, configuration) preserved.
pub fn augment_rotate180(record: &VPTRecord, new_id: u32) -> Result<VPTRecord, DatasetError> {
    if record.augmented {
        return Err(DatasetError::AlreadyAugmented { id: record.id });
    }
    let mut twin = record.clone();
    twin.id = new_id;
    twin.patch = record.patch.rotate180();
    twin.augmented = true;
    Ok(twin)
}

/// Builds the dataset: `per_object` grasp trials per world object, each on a
/// fresh seeded scene containing just that object, followed by 180-degree
/// augmentation of every record. Deterministic given the seed; the output
/// has exactly `2 * objects * per_object` records.
pub fn build_vpt(world: &World, per_object: u32, seed: u64) -> Result<VPTDataset, DatasetError> {
    if world.objects.is_empty() {
        return Err(DatasetError::NoObjects);
    }
    let mut records: Vec<VPTRecord> = Vec::with_capacity(world.objects.len() * per_object as usize * 2);

    for (obj_index, object) in world.objects.iter().enumerate() {
        for trial in 0..per_object {
            let record_index = obj_index as u64 * per_object as u64 + trial as u64;
            let mut rng = SplitMix64::new(mix_seed(seed, &[record_index]));

            let poses = place_objects_random(std::slice::from_ref(object), rng.next_u64())?;
            let scene = render_scene(&world.objects, &poses)?;
            let pose = &poses[0];

            let config = sample_config(&mut rng, &scene.placements[0]);
            let trial_seed = rng.next_u64();
            let scenario = crate::scene::ground_truth_outcome(&scene, &config, &world.oracle, trial_seed);
            let shaken = simulate_shake(&scenario);
            let score = grasp_score(&shaken.image, &world.metric);

            records.push(VPTRecord {
                id: record_index as u32,
                object_id: object.id.clone(),
                trial,
                config,
                patch: extract_patch(&scene.image, &config),
                tactile: shaken.image,
                score,
                category: categorize(score),
                scenario: ScenarioSummary::from(&scenario),
                augmented: false,
                pose_u: pose.u,
                pose_v: pose.v,
                pose_deg: pose.orientation_deg,
                trial_seed,
            });
        }
    }

    let originals = records.len() as u32;
    for index in 0..originals {
        let twin = augment_rotate180(&records[index as usize], originals + index)?;
        records.push(twin);
    }

    let mut warnings = Vec::new();
    for category in [
        StabilityCategory::Failure,
        StabilityCategory::Falling,
        StabilityCategory::Slippery,
        StabilityCategory::Stable,
    ] {
        if !records.iter().any(|r| r.category == category) {
            warnings.push(format!("category starvation: no {category} records"));
        }
    }

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        objects: world.objects.iter().map(|o| o.id.clone()).collect(),
        per_object,
        total_records: records.len() as u32,
        master_seed: seed,
        augmented: true,
        sampling: SamplingParams {
            near_fraction: NEAR_FRACTION,
            near_offset_std: NEAR_OFFSET_STD,
            near_angle_bias: NEAR_ANGLE_BIAS,
        },
        warnings,
    };
    Ok(VPTDataset { manifest, records })
}

/// Nearest grid angle to the placement's preferred grasp axis, measured
/// with 180-degree folding.
fn aimed_angle(placement: &crate::scene::Placement) -> Option<u16> {
    let pref = placement.preferred_grasp_axis_deg()?;
    GRASP_ANGLES_DEG
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let fold = |angle: u16| {
                let diff = (angle as f64 - pref).rem_euclid(180.0);
                diff.min(180.0 - diff)
            };
            fold(a).partial_cmp(&fold(b)).expect("finite angles")
        })
}

/// 60% of grasps perturb the object center (half of them aimed at the
/// preferred axis, half at a uniform angle), 40% are uniform over the
/// scene, so all four outcome categories occur.
fn sample_config(rng: &mut SplitMix64, placement: &crate::scene::Placement) -> GraspConfiguration {
    let near = rng.next_f64() < NEAR_FRACTION;
    let uniform_angle = GRASP_ANGLES_DEG[rng.next_below(GRASP_ANGLES_DEG.len())];
    if near {
        let du = (rng.normal() * NEAR_OFFSET_STD).round() as i32;
        let dv = (rng.normal() * NEAR_OFFSET_STD).round() as i32;
        let u = (placement.u + du).clamp(0, SCENE_WIDTH as i32 - 1);
        let v = (placement.v + dv).clamp(0, SCENE_HEIGHT as i32 - 1);
        let aimed = rng.next_f64() < NEAR_ANGLE_BIAS;
        let angle = match (aimed, aimed_angle(placement)) {
            (true, Some(a)) => a,
            _ => uniform_angle,
        };
        GraspConfiguration { u, v, angle_deg: angle }
    } else {
        GraspConfiguration {
            u: rng.next_below(SCENE_WIDTH) as i32,
            v: rng.next_below(SCENE_HEIGHT) as i32,
            angle_deg: uniform_angle,
        }
    }
}

/// Replays the trial scene a record was generated from.
pub fn replay_scene(world: &World, record: &VPTRecord) -> Result<Scene, DatasetError> {
    let pose = crate::scene::Pose {
        object_id: record.object_id.clone(),
        u: record.pose_u,
        v: record.pose_v,
        orientation_deg: record.pose_deg,
    };
    Ok(render_scene(&world.objects, &[pose])?)
}

/// Pairs every record with its binary label under the scheme, preserving
/// record order.
pub fn project_labels(dataset: &VPTDataset, scheme: LabelScheme) -> Vec<(&VPTRecord, u8)> {
    dataset.records.iter().map(|r| (r, scheme.label(r.score))).collect()
}

/// FNV-1a over the record metadata and payloads; identifies a dataset in
/// trained model manifests.
pub fn content_hash(dataset: &VPTDataset) -> u64 {
    let mut hash = FNV_OFFSET;
    fnv_bytes(&mut hash, &dataset.manifest.total_records.to_le_bytes());
    fnv_bytes(&mut hash, &dataset.manifest.master_seed.to_le_bytes());
    for record in &dataset.records {
        fnv_bytes(&mut hash, &record.id.to_le_bytes());
        fnv_bytes(&mut hash, record.object_id.as_bytes());
        fnv_bytes(&mut hash, &record.score.value().to_bits().to_le_bytes());
        fnv_bytes(&mut hash, &[record.augmented as u8]);
        fnv_bytes(&mut hash, record.patch.pixels());
    }
    hash
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_bytes(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(FNV_PRIME);
    }
}

fn fnv_hex(bytes: &[u8]) -> String {
    let mut hash = FNV_OFFSET;
    fnv_bytes(&mut hash, bytes);
    format!("{hash:016x}")
}

/// Writes the dataset directory: manifest.json, records.jsonl,
/// `patches/<id>.pgm`, `tactile/<id>.csv`. Byte-exact round trip with
/// `load_dataset`.
pub fn save_dataset(dataset: &VPTDataset, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let patches_dir = dir.join("patches");
    let tactile_dir = dir.join("tactile");
    fs::create_dir_all(&patches_dir).map_err(io_err(&patches_dir))?;
    fs::create_dir_all(&tactile_dir).map_err(io_err(&tactile_dir))?;

    let manifest_json = serde_json::to_string_pretty(&dataset.manifest).map_err(|source| {
        DatasetError::Json { context: "serializing manifest".into(), source }
    })?;
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, manifest_json + "\n").map_err(io_err(&manifest_path))?;

    let mut lines = String::new();
    for record in &dataset.records {
        let pgm = record.patch.to_pgm();
        let csv = record.tactile.to_csv();
        let meta = RecordMeta {
            id: record.id,
            object_id: record.object_id.clone(),
            trial: record.trial,
            u: record.config.u,
            v: record.config.v,
            a: record.config.angle_deg,
            score: record.score.value(),
            category: record.category,
            mode: record.scenario.mode.clone(),
            parameter: record.scenario.parameter,
            augmented: record.augmented,
            pose_u: record.pose_u,
            pose_v: record.pose_v,
            pose_deg: record.pose_deg,
            trial_seed: record.trial_seed,
            patch_hash: fnv_hex(&pgm),
            tactile_hash: fnv_hex(csv.as_bytes()),
        };
        lines.push_str(&serde_json::to_string(&meta).map_err(|source| DatasetError::Json {
            context: format!("serializing record {}", record.id),
            source,
        })?);
        lines.push('\n');

        let patch_path = patches_dir.join(format!("{}.pgm", record.id));
        fs::write(&patch_path, pgm).map_err(io_err(&patch_path))?;
        let tactile_path = tactile_dir.join(format!("{}.csv", record.id));
        fs::write(&tactile_path, csv).map_err(io_err(&tactile_path))?;
    }
    let records_path = dir.join("records.jsonl");
    fs::write(&records_path, lines).map_err(io_err(&records_path))?;
    Ok(())
}

/// Loads and validates a dataset directory. Failures name the offending
/// record: wrong patch shape, hash mismatch, score/category disagreement,
/// manifest count mismatch, or missing files.
pub fn load_dataset(dir: &Path) -> Result<VPTDataset, DatasetError> {
    let manifest_path = dir.join("manifest.json");
    let manifest_text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&manifest_text).map_err(|source| DatasetError::Json {
            context: "parsing manifest.json".into(),
            source,
        })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(DatasetError::BadManifest(format!(
            "unsupported format version {}, expected {FORMAT_VERSION}",
            manifest.format_version
        )));
    }

    let records_path = dir.join("records.jsonl");
    let records_text = fs::read_to_string(&records_path).map_err(io_err(&records_path))?;
    let mut records = Vec::new();
    for (line_no, line) in records_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let meta: RecordMeta = serde_json::from_str(line).map_err(|source| DatasetError::Json {
            context: format!("records.jsonl line {}", line_no + 1),
            source,
        })?;
        let id = meta.id;
        let bad = |message: String| DatasetError::BadRecord { id, message };

        let patch_path = dir.join("patches").join(format!("{id}.pgm"));
        let pgm_bytes = fs::read(&patch_path).map_err(io_err(&patch_path))?;
        if fnv_hex(&pgm_bytes) != meta.patch_hash {
            return Err(bad(format!("patch file {} does not match its hash", patch_path.display())));
        }
        let patch = GrayImage::from_pgm(&pgm_bytes)
            .map_err(|e| bad(format!("patch file {}: {e}", patch_path.display())))?;
        if patch.width() != PATCH_SIZE || patch.height() != PATCH_SIZE {
            return Err(bad(format!(
                "patch is {}x{}, expected {PATCH_SIZE}x{PATCH_SIZE}",
                patch.width(),
                patch.height()
            )));
        }

        let tactile_path = dir.join("tactile").join(format!("{id}.csv"));
        let tactile_text = fs::read_to_string(&tactile_path).map_err(io_err(&tactile_path))?;
        if fnv_hex(tactile_text.as_bytes()) != meta.tactile_hash {
            return Err(bad(format!(
                "tactile file {} does not match its hash",
                tactile_path.display()
            )));
        }
        let tactile = TactileImage::parse_csv(&tactile_text)
            .map_err(|e| bad(format!("tactile file {}: {e}", tactile_path.display())))?;

        let score = GraspScore::new(meta.score).map_err(|e| bad(e.to_string()))?;
        if categorize(score) != meta.category {
            return Err(bad(format!(
                "category {} does not match score {}",
                meta.category, meta.score
            )));
        }
        let config = GraspConfiguration::new(meta.u, meta.v, meta.a)
            .map_err(|e| bad(e.to_string()))?;

        records.push(VPTRecord {
            id,
            object_id: meta.object_id,
            trial: meta.trial,
            config,
            patch,
            tactile,
            score,
            category: meta.category,
            scenario: ScenarioSummary { mode: meta.mode, parameter: meta.parameter },
            augmented: meta.augmented,
            pose_u: meta.pose_u,
            pose_v: meta.pose_v,
            pose_deg: meta.pose_deg,
            trial_seed: meta.trial_seed,
        });
    }

    if records.len() as u32 != manifest.total_records {
        return Err(DatasetError::BadManifest(format!(
            "manifest declares {} records, found {}",
            manifest.total_records,
            records.len()
        )));
    }
    let augmented_count = records.iter().filter(|r| r.augmented).count();
    if manifest.augmented && augmented_count * 2 != records.len() {
        return Err(DatasetError::BadManifest(format!(
            "expected half of {} records augmented, found {augmented_count}",
            records.len()
        )));
    }

    Ok(VPTDataset { manifest, records })
}
