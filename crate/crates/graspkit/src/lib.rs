//! graspkit: a desk-scale toolkit for tactile-informed grasp planning.
//!
//! The crate covers the full loop usually spread across a robot, a tactile
//! sensor and a camera, replaced here by deterministic simulators:
//!
//! * [`tactile`] — the grasp-quality metric: kernel convolutions over 5x5
//!   tactile imprints, failure/falling detection, continuous scoring and
//!   stability categories.
//! * [`shake`] — synthesizes tactile images from ground-truth contact
//!   scenarios and implements the shake-until-drop endurance benchmark.
//! * [`scene`] — synthetic 400x300 tabletop scenes with parameterized
//!   objects and the oracle mapping a grasp configuration to its outcome.
//! * [`dataset`] — builds, augments, labels and persists the self-supervised
//!   visual-tactile dataset.
//! * [`learning`] — a pluggable binary patch classifier with a small linear
//!   reference model and a deterministic mini-batch trainer.
//! * [`pipeline`] — the two-phase grasp policy: sliding-window region
//!   estimation followed by 54-way stable-configuration selection.
//! * [`harness`] — end-to-end experiments: metric consistency, classifier
//!   accuracy, and the tactile-informed vs vision-only policy comparison.
//!
//! Every seeded operation is fully deterministic: same inputs and seeds give
//! byte-identical datasets, models and reports. See the crate examples for
//! one runnable walkthrough per capability.

pub mod dataset;
pub mod harness;
pub mod learning;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod shake;
pub mod tactile;

pub use dataset::{build_vpt, extract_patch, load_dataset, save_dataset, LabelScheme, VPTDataset};
pub use harness::{benchmark_metric, run_accuracy, run_comparison, PolicyModels};
pub use learning::{PatchClassifier, ReferenceModel, TrainConfig, TrainSet};
pub use pipeline::{candidate_windows, plan_bayesian, plan_vision, PipelineError, PlannedGrasp};
pub use raster::GrayImage;
pub use scene::{
    ground_truth_outcome, place_objects_random, render_scene, GraspConfiguration, ObjectSpec,
    OracleParams, Pose, Scene, World,
};
pub use shake::{
    endurance_hold_time, endurance_score, sample_scenarios, simulate_shake, CategoryMix,
    ContactScenario, ScenarioMode, ShakeProtocol,
};
pub use tactile::{
    categorize, grasp_score, slip_magnitude, GraspScore, MetricParams, StabilityCategory,
    TactileImage,
};
