//! End to end: build a dataset, train the two pipeline models, plan a
//! grasp on a fresh scene and execute it against the oracle.
//!
//! ```bash
//! cargo run --release -p graspkit --example plan_grasp
//! ```

use graspkit::dataset::{build_vpt, LabelScheme};
use graspkit::learning::{train, TrainConfig, TrainSet};
use graspkit::pipeline::plan_bayesian;
use graspkit::scene::{ground_truth_outcome, place_objects_random, render_scene};
use graspkit::shake::simulate_shake;
use graspkit::tactile::{categorize, grasp_score};
use graspkit::World;

fn main() -> anyhow::Result<()> {
    let world = World::known();

    println!("building dataset and training region + stable models...");
    let dataset = build_vpt(&world, 150, 7)?;
    let train_on = |scheme| -> anyhow::Result<_> {
        let set = TrainSet::from_dataset(&dataset, scheme)?;
        Ok(train(&set, None, &TrainConfig::preset(scheme, 7))?.0)
    };
    let gre = train_on(LabelScheme::Gre)?;
    let scg = train_on(LabelScheme::Scg)?;

    // A fresh single-object scene the models never saw.
    let screw = world.object("screw")?.clone();
    let poses = place_objects_random(std::slice::from_ref(&screw), 12345)?;
    let scene = render_scene(&world.objects, &poses)?;
    println!(
        "scene: {} at ({}, {}) oriented {:.0} deg",
        poses[0].object_id, poses[0].u, poses[0].v, poses[0].orientation_deg
    );

    let plan = plan_bayesian(&scene.image, &gre, &scg, 99)?;
    println!(
        "planned grasp: u {} v {} angle {} (p = {:.3})",
        plan.config.u, plan.config.v, plan.config.angle_deg, plan.probability
    );

    let scenario = ground_truth_outcome(&scene, &plan.config, &world.oracle, 99);
    let score = grasp_score(&simulate_shake(&scenario).image, &world.metric);
    println!(
        "executed: oracle says {:?}, realized score {:.3} ({})",
        scenario.mode,
        score.value(),
        categorize(score)
    );
    Ok(())
}
