//! Render a tabletop scene, export it as PGM, and query the ground-truth
//! oracle at a few grasp configurations.
//!
//! ```bash
//! cargo run -p graspkit --example scene_oracle
//! ```

use std::fs;

use graspkit::scene::{
    ground_truth_outcome, place_objects_random, render_scene, save_presets, GraspConfiguration,
    World,
};
use graspkit::shake::simulate_shake;
use graspkit::tactile::{categorize, grasp_score};

fn main() -> anyhow::Result<()> {
    let world = World::known();
    let out_dir = std::path::Path::new("target/examples-out");
    fs::create_dir_all(out_dir)?;

    // All five presets placed at once, seeded and non-overlapping.
    let poses = place_objects_random(&world.objects, 7)?;
    let scene = render_scene(&world.objects, &poses)?;
    let pgm = out_dir.join("scene.pgm");
    scene.image.save_pgm(&pgm)?;
    let presets = out_dir.join("presets.csv");
    save_presets(&world.objects, &presets)?;
    println!("scene written to {} ({} objects), presets to {}", pgm.display(), poses.len(), presets.display());

    for pose in &poses {
        println!("  {} at ({}, {}) oriented {:.0} deg", pose.object_id, pose.u, pose.v, pose.orientation_deg);
    }

    // Probe the oracle around the first object: dead center, off-center,
    // and far away.
    let target = &poses[0];
    println!("\noracle outcomes around {}:", target.object_id);
    for (label, du, dv, angle) in [
        ("centered, angle 0", 0, 0, 0),
        ("centered, angle 90", 0, 0, 90),
        ("20 px off", 0, 20, 0),
        ("45 px off", 0, 45, 0),
        ("background", 150, 0, 0),
    ] {
        let config = GraspConfiguration::new(
            (target.u + du).clamp(0, 399),
            (target.v + dv).clamp(0, 299),
            angle,
        )?;
        let scenario = ground_truth_outcome(&scene, &config, &world.oracle, 42);
        let score = grasp_score(&simulate_shake(&scenario).image, &world.metric);
        println!(
            "  {label:<20} -> {:?} -> score {:.3} ({})",
            scenario.mode,
            score.value(),
            categorize(score)
        );
    }
    Ok(())
}
