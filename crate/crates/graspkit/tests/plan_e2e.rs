//! End-to-end planning: with trained models, a well-placed object yields a
//! configuration whose noiseless oracle score clears the stable threshold.

use graspkit::dataset::{build_vpt, LabelScheme};
use graspkit::harness::noiseless_score;
use graspkit::learning::{train, TrainConfig, TrainSet};
use graspkit::pipeline::plan_bayesian;
use graspkit::scene::{render_scene, Pose, World};

#[test]
fn planned_grasp_on_well_placed_object_is_stable() {
    let world = World::known();
    let dataset = build_vpt(&world, 120, 7).unwrap();
    let train_preset = |scheme: LabelScheme| {
        let set = TrainSet::from_dataset(&dataset, scheme).unwrap();
        train(&set, None, &TrainConfig::preset(scheme, 7)).unwrap().0
    };
    let gre = train_preset(LabelScheme::Gre);
    let scg = train_preset(LabelScheme::Scg);

    // A centered, axis-aligned metal bar: the friendliest possible scene.
    let pose = Pose { object_id: "metal_bar".into(), u: 210, v: 128, orientation_deg: 90.0 };
    let scene = render_scene(&world.objects, &[pose]).unwrap();

    let plan = plan_bayesian(&scene.image, &gre, &scg, 7).unwrap();
    let score = noiseless_score(&world, &scene, &plan.config);
    assert!(
        score > 0.85,
        "planned config {:?} scored {score}",
        plan.config
    );

    // Same seed, same scene bytes: the plan is reproducible.
    let again = plan_bayesian(&scene.image, &gre, &scg, 7).unwrap();
    assert_eq!(plan, again);
}
