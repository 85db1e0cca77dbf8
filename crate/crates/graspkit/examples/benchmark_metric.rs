//! Rank-correlate the grasp score against the endurance benchmark over a
//! mixed batch of scenarios and write a plot-ready CSV.
//!
//! ```bash
//! cargo run -p graspkit --example benchmark_metric
//! ```

use graspkit::harness::benchmark_metric;
use graspkit::shake::CategoryMix;
use graspkit::World;

fn main() -> anyhow::Result<()> {
    let world = World::known();

    let bench = benchmark_metric(500, &CategoryMix::default(), 7, &world)?;
    println!(
        "spearman rho = {:.4} over {} mixed scenarios (noise 0.5)",
        bench.spearman_rho,
        bench.pairs.len()
    );

    let all_slip = benchmark_metric(200, &CategoryMix::all_slip(), 7, &world)?;
    println!("all-slip batch: rho = {:.4}", all_slip.spearman_rho);

    let out = std::path::Path::new("target/examples-out");
    std::fs::create_dir_all(out)?;
    let path = out.join("pairs.csv");
    std::fs::write(&path, bench.to_pairs_csv())?;
    println!("paired samples written to {}", path.display());
    Ok(())
}
