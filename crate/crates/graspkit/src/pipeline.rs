//! Two-phase grasp planning.
//!
//! Phase one slides twenty 100x100 candidate windows over the scene (stride
//! 80x78, final row and column clamped to the image edge), classifies each
//! with the region model and picks one positive window uniformly at random
//! (seeded). Phase two expands the chosen window into 54 configuration
//! proposals — a 3x3 grid of centers crossed with six angles — scores each
//! proposal's gripper-frame patch with the configuration model and commits
//! to the most probable positive.
//!
//! `plan_bayesian` runs phase two with the tactile-trained stable-grasp
//! model; `plan_vision` swaps in the vision-labeled baseline. Everything
//! else is shared, which is exactly what the policy comparison measures.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{extract_patch, PATCH_SIZE};
use crate::learning::{is_positive, PatchClassifier};
use crate::raster::GrayImage;
use crate::rng::SplitMix64;
use crate::scene::{GraspConfiguration, GRASP_ANGLES_DEG};

/// Candidate window side length.
pub const WINDOW_SIZE: usize = PATCH_SIZE;
/// Sliding-window strides (x, y).
pub const WINDOW_STRIDE: (usize, usize) = (80, 78);
/// Center grid offsets within a window, both axes.
pub const CENTER_OFFSETS: [usize; 3] = [25, 50, 75];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error("scene {width}x{height} is smaller than a {WINDOW_SIZE}x{WINDOW_SIZE} window")]
    SceneTooSmall { width: usize, height: usize },
    #[error("no graspable region: every candidate window classified negative")]
    NoGraspableRegion,
    #[error("no stable configuration: all 54 proposals classified negative")]
    NoStableConfiguration,
}

impl PipelineError {
    /// Process exit code this error maps to in the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::NoGraspableRegion => 2,
            PipelineError::NoStableConfiguration => 3,
            PipelineError::SceneTooSmall { .. } => 4,
        }
    }
}

/// Origin of one 100x100 candidate window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CandidateWindow {
    pub x: usize,
    pub y: usize,
}

/// One grasp proposal: configuration, its gripper-frame patch, and the
/// classifier probability once scored.
#[derive(Debug, Clone)]
pub struct ConfigurationProposal {
    pub config: GraspConfiguration,
    pub patch: GrayImage,
    pub probability: Option<f64>,
}

/// A committed plan: the configuration plus the probability that chose it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannedGrasp {
    pub config: GraspConfiguration,
    pub probability: f64,
}

fn clamped_origins(extent: usize, stride: usize) -> Vec<usize> {
    let mut origins = Vec::new();
    let mut x = 0usize;
    while x + WINDOW_SIZE <= extent {
        origins.push(x);
        x += stride;
    }
    let last = *origins.last().expect("extent checked >= window size");
    if last + WINDOW_SIZE < extent {
        origins.push(extent - WINDOW_SIZE);
    }
    origins
}

/// The sliding-window candidates in row-major order. On the standard
/// 400x300 scene this is exactly 20 windows: x origins {0, 80, 160, 240,
/// 300} and y origins {0, 78, 156, 200}.
pub fn candidate_windows(image: &GrayImage) -> Result<Vec<CandidateWindow>, PipelineError> {
    if image.width() < WINDOW_SIZE || image.height() < WINDOW_SIZE {
        return Err(PipelineError::SceneTooSmall { width: image.width(), height: image.height() });
    }
    let xs = clamped_origins(image.width(), WINDOW_STRIDE.0);
    let ys = clamped_origins(image.height(), WINDOW_STRIDE.1);
    let mut windows = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            windows.push(CandidateWindow { x, y });
        }
    }
    Ok(windows)
}

/// Classifies every window's crop and picks one positive uniformly at
/// random (seeded). Errors when no window is positive.
pub fn select_region(
    model: &dyn PatchClassifier,
    image: &GrayImage,
    windows: &[CandidateWindow],
    seed: u64,
) -> Result<CandidateWindow, PipelineError> {
    let positives: Vec<CandidateWindow> = windows
        .iter()
        .copied()
        .filter(|w| {
            let crop = image
                .crop(w.x, w.y, WINDOW_SIZE, WINDOW_SIZE)
                .expect("windows are in bounds by construction");
            is_positive(model.predict_patch(&crop))
        })
        .collect();
    if positives.is_empty() {
        return Err(PipelineError::NoGraspableRegion);
    }
    let mut rng = SplitMix64::new(seed);
    Ok(positives[rng.next_below(positives.len())])
}

/// Expands a window into 54 proposals: 9 centers (3x3 grid at quarter
/// offsets) x 6 angles, centers row-major and angles ascending.
pub fn expand_configurations(image: &GrayImage, window: &CandidateWindow) -> Vec<ConfigurationProposal> {
    let mut proposals = Vec::with_capacity(CENTER_OFFSETS.len().pow(2) * GRASP_ANGLES_DEG.len());
    for &dy in &CENTER_OFFSETS {
        for &dx in &CENTER_OFFSETS {
            let u = (window.x + dx) as i32;
            let v = (window.y + dy) as i32;
            for &angle in &GRASP_ANGLES_DEG {
                let config = GraspConfiguration { u, v, angle_deg: angle };
                proposals.push(ConfigurationProposal {
                    config,
                    patch: extract_patch(image, &config),
                    probability: None,
                });
            }
        }
    }
    proposals
}

/// Scores every proposal, then returns the positive with the highest
/// probability; ties break toward the smallest (v, u, angle). Errors when
/// every proposal is negative.
pub fn select_configuration(
    model: &dyn PatchClassifier,
    proposals: &mut [ConfigurationProposal],
) -> Result<PlannedGrasp, PipelineError> {
    for proposal in proposals.iter_mut() {
        proposal.probability = Some(model.predict_patch(&proposal.patch));
    }
    let mut best: Option<PlannedGrasp> = None;
    for proposal in proposals.iter() {
        let p = proposal.probability.expect("probability filled above");
        if !is_positive(p) {
            continue;
        }
        let candidate = PlannedGrasp { config: proposal.config, probability: p };
        best = Some(match best {
            None => candidate,
            Some(current) => {
                let candidate_key = (proposal.config.v, proposal.config.u, proposal.config.angle_deg);
                let current_key = (current.config.v, current.config.u, current.config.angle_deg);
                if p > current.probability
                    || (p == current.probability && candidate_key < current_key)
                {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    best.ok_or(PipelineError::NoStableConfiguration)
}

/// The full two-phase plan with the tactile-trained stable-configuration
/// model in the second phase.
pub fn plan_bayesian(
    image: &GrayImage,
    region_model: &dyn PatchClassifier,
    stable_model: &dyn PatchClassifier,
    seed: u64,
) -> Result<PlannedGrasp, PipelineError> {
    let windows = candidate_windows(image)?;
    let window = select_region(region_model, image, &windows, seed)?;
    let mut proposals = expand_configurations(image, &window);
    select_configuration(stable_model, &mut proposals)
}

/// Identical machinery with the vision-labeled baseline in the
/// stable-configuration slot.
pub fn plan_vision(
    image: &GrayImage,
    region_model: &dyn PatchClassifier,
    vision_model: &dyn PatchClassifier,
    seed: u64,
) -> Result<PlannedGrasp, PipelineError> {
    plan_bayesian(image, region_model, vision_model, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::ReferenceModel;
    use crate::scene::{Scene, SCENE_HEIGHT, SCENE_WIDTH};

    fn bias_model(bias: f64) -> ReferenceModel {
        ReferenceModel { bias, ..Default::default() }
    }

    #[test]
    fn standard_scene_has_twenty_windows() {
        let image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 0);
        let windows = candidate_windows(&image).unwrap();
        assert_eq!(windows.len(), 20);
        let xs: Vec<usize> = windows.iter().map(|w| w.x).collect();
        let ys: Vec<usize> = windows.iter().map(|w| w.y).collect();
        let mut unique_xs = xs.clone();
        unique_xs.sort_unstable();
        unique_xs.dedup();
        assert_eq!(unique_xs, vec![0, 80, 160, 240, 300]);
        let mut unique_ys = ys;
        unique_ys.sort_unstable();
        unique_ys.dedup();
        assert_eq!(unique_ys, vec![0, 78, 156, 200]);
        // Row-major: first row varies x with y = 0.
        assert_eq!(windows[0], CandidateWindow { x: 0, y: 0 });
        assert_eq!(windows[4], CandidateWindow { x: 300, y: 0 });
        assert_eq!(windows[5], CandidateWindow { x: 0, y: 78 });
        // All in bounds.
        for w in &windows {
            assert!(w.x + WINDOW_SIZE <= SCENE_WIDTH && w.y + WINDOW_SIZE <= SCENE_HEIGHT);
        }
    }

    #[test]
    fn window_edge_cases() {
        let exact = GrayImage::new(100, 100, 0);
        let windows = candidate_windows(&exact).unwrap();
        assert_eq!(windows, vec![CandidateWindow { x: 0, y: 0 }]);

        let narrow = GrayImage::new(99, 300, 0);
        assert_eq!(
            candidate_windows(&narrow),
            Err(PipelineError::SceneTooSmall { width: 99, height: 300 })
        );
    }

    #[test]
    fn select_region_seeded_choice() {
        let image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 128);
        let windows = candidate_windows(&image).unwrap();
        let positive = bias_model(1.0);
        let negative = bias_model(-1.0);

        // All negative: no graspable region.
        assert_eq!(
            select_region(&negative, &image, &windows, 1).unwrap_err(),
            PipelineError::NoGraspableRegion
        );
        // All positive: the seeded choice repeats.
        let a = select_region(&positive, &image, &windows, 42).unwrap();
        let b = select_region(&positive, &image, &windows, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn select_region_single_positive_any_seed() {
        // A model positive only where the window crop is dark: darken one
        // window fully.
        let mut image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 255);
        for y in 78..178 {
            for x in 80..180 {
                image.set(x, y, 0);
            }
        }
        let mut model = ReferenceModel::default();
        for w in model.weights.iter_mut() {
            *w = -1.0;
        }
        model.bias = 50.0; // positive iff mean feature < 0.5
        let windows = candidate_windows(&image).unwrap();
        for seed in 0..10 {
            let chosen = select_region(&model, &image, &windows, seed).unwrap();
            assert_eq!(chosen, CandidateWindow { x: 80, y: 78 });
        }
    }

    #[test]
    fn expand_produces_54_distinct_proposals() {
        let image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 100);
        let window = CandidateWindow { x: 0, y: 0 };
        let proposals = expand_configurations(&image, &window);
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
        // Centers stay within the window and the scene.
        for p in &proposals {
            assert!((25..=75).contains(&p.config.u));
            assert!((25..=75).contains(&p.config.v));
        }
    }

    #[test]
    fn expanded_angle_zero_patch_matches_direct_crop() {
        let mut image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 100);
        for y in 120..180 {
            for x in 150..260 {
                image.set(x, y, 30);
            }
        }
        let window = CandidateWindow { x: 160, y: 78 };
        let proposals = expand_configurations(&image, &window);
        let centered = proposals
            .iter()
            .find(|p| p.config.angle_deg == 0 && p.config.u == 210 && p.config.v == 128)
            .unwrap();
        let crop = image.crop(210 - 50, 128 - 50, 100, 100).unwrap();
        assert_eq!(centered.patch, crop);
    }

    #[test]
    fn select_configuration_rules() {
        let image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, 100);
        let window = CandidateWindow { x: 0, y: 0 };

        // All negative.
        let mut proposals = expand_configurations(&image, &window);
        assert_eq!(
            select_configuration(&bias_model(-2.0), &mut proposals).unwrap_err(),
            PipelineError::NoStableConfiguration
        );

        // Uniform scene: every proposal ties, so the lexicographically
        // smallest (v, u, angle) wins.
        let mut proposals = expand_configurations(&image, &window);
        let planned = select_configuration(&bias_model(2.0), &mut proposals).unwrap();
        assert_eq!((planned.config.v, planned.config.u, planned.config.angle_deg), (25, 25, 0));

        // A single positive is returned regardless of magnitude: shrink to
        // one proposal with a barely-positive model.
        let mut single = vec![proposals[13].clone()];
        let planned = select_configuration(&bias_model(0.01), &mut single).unwrap();
        assert_eq!(planned.config, single[0].config);
    }

    #[test]
    fn plan_bayesian_deterministic_and_errors() {
        let scene = Scene::empty();
        let gre_neg = bias_model(-1.0);
        let scg_pos = bias_model(1.0);
        assert_eq!(
            plan_bayesian(&scene.image, &gre_neg, &scg_pos, 7).unwrap_err(),
            PipelineError::NoGraspableRegion
        );

        let gre_pos = bias_model(1.0);
        let scg_neg = bias_model(-1.0);
        assert_eq!(
            plan_bayesian(&scene.image, &gre_pos, &scg_neg, 7).unwrap_err(),
            PipelineError::NoStableConfiguration
        );

        let a = plan_bayesian(&scene.image, &gre_pos, &scg_pos, 7).unwrap();
        let b = plan_bayesian(&scene.image, &gre_pos, &scg_pos, 7).unwrap();
        assert_eq!(a, b);
        // Identical models in both slots: the vision plan coincides.
        let v = plan_vision(&scene.image, &gre_pos, &scg_pos, 7).unwrap();
        assert_eq!(a, v);
    }
}
