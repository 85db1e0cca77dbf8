//! The policy experiment: tactile-informed planning versus the vision-only
//! baseline, paired per trial, with a written report.
//!
//! ```bash
//! cargo run --release -p graspkit --example policy_comparison
//! ```

use graspkit::dataset::{build_vpt, LabelScheme};
use graspkit::harness::{run_comparison, PolicyModels};
use graspkit::learning::{train, TrainConfig, TrainSet};
use graspkit::World;

fn main() -> anyhow::Result<()> {
    let world = World::known();

    println!("building dataset and training all three presets...");
    let dataset = build_vpt(&world, 300, 7)?;
    let train_on = |scheme| -> anyhow::Result<_> {
        let set = TrainSet::from_dataset(&dataset, scheme)?;
        Ok(train(&set, None, &TrainConfig::preset(scheme, 7))?.0)
    };
    let models = PolicyModels {
        region: train_on(LabelScheme::Gre)?,
        stable: train_on(LabelScheme::Scg)?,
        vision: train_on(LabelScheme::VisionBaseline)?,
    };

    // 40 paired trials per object keeps this example quick; the acceptance
    // experiment runs 100.
    let report = run_comparison(&world, &models, 40, 7)?;
    println!("\n{:<20} {:>9} {:>8} {:>8}", "object", "bayesian", "vision", "gain");
    for o in &report.per_object {
        println!(
            "{:<20} {:>9.3} {:>8.3} {:>+8.3}",
            o.object_id, o.bayesian_rate, o.vision_rate, o.point_gain
        );
    }
    println!(
        "{:<20} {:>9.3} {:>8.3} {:>+8.3}",
        "mean", report.mean_bayesian_rate, report.mean_vision_rate, report.mean_point_gain
    );
    if let Some(rel) = report.mean_relative_improvement {
        println!("mean relative improvement: {:+.1}%", rel * 100.0);
    }

    let dir = std::path::Path::new("target/examples-out/report");
    report.write(dir)?;
    println!("summary.json and table.csv written to {}", dir.display());
    Ok(())
}
