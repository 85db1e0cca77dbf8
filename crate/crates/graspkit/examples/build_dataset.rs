//! Build a small self-supervised dataset, persist it, and reload it.
//!
//! ```bash
//! cargo run -p graspkit --example build_dataset
//! ```

use std::collections::BTreeMap;

use graspkit::dataset::{build_vpt, load_dataset, project_labels, save_dataset, LabelScheme};
use graspkit::World;

fn main() -> anyhow::Result<()> {
    let world = World::known();

    // 20 grasps per object here to stay quick; the standard dataset uses
    // 300 per object for 3000 records after augmentation.
    let dataset = build_vpt(&world, 20, 7)?;
    println!(
        "built {} records from {} objects (seed {})",
        dataset.records.len(),
        dataset.manifest.objects.len(),
        dataset.manifest.master_seed
    );

    let mut categories: BTreeMap<String, usize> = BTreeMap::new();
    for record in &dataset.records {
        *categories.entry(record.category.to_string()).or_default() += 1;
    }
    println!("category histogram: {categories:?}");

    for scheme in [LabelScheme::Gre, LabelScheme::VisionBaseline, LabelScheme::Scg] {
        let positives: usize =
            project_labels(&dataset, scheme).iter().map(|(_, l)| *l as usize).sum();
        println!("{scheme} positives: {positives}/{} (threshold > {})", dataset.records.len(), scheme.threshold());
    }

    let dir = std::path::Path::new("target/examples-out/vpt-demo");
    save_dataset(&dataset, dir)?;
    let reloaded = load_dataset(dir)?;
    assert_eq!(reloaded, dataset);
    println!("round trip through {} is exact", dir.display());
    Ok(())
}
