//! Train the stable-configuration classifier and inspect the result.
//!
//! ```bash
//! cargo run --release -p graspkit --example train_classifier
//! ```

use graspkit::dataset::{build_vpt, LabelScheme};
use graspkit::harness::stratified_split;
use graspkit::learning::{evaluate, gradient_check, train, TrainConfig, TrainSet};

fn main() -> anyhow::Result<()> {
    let world = graspkit::World::known();
    let dataset = build_vpt(&world, 100, 7)?;

    // 80/20 split, stratified by object, augmented twins kept together.
    let (train_idx, heldout_idx) = stratified_split(&dataset, 7);
    let train_set = TrainSet::from_dataset_indices(&dataset, LabelScheme::Scg, &train_idx)?;
    let heldout_set = TrainSet::from_dataset_indices(&dataset, LabelScheme::Scg, &heldout_idx)?;

    let config = TrainConfig::preset(LabelScheme::Scg, 7);
    println!(
        "training scg preset: batch {}, {} epochs, lr {}",
        config.batch_size, config.epochs, config.learning_rate
    );
    let (model, report) = train(&train_set, Some(&heldout_set), &config)?;
    println!(
        "mean loss {:.4} -> {:.4} over {} epochs ({:.2}s)",
        report.epoch_mean_loss.first().unwrap(),
        report.epoch_mean_loss.last().unwrap(),
        config.epochs,
        report.wall_seconds
    );
    println!("train accuracy {:.3}", report.final_train_accuracy);
    println!("heldout accuracy {:.3}", report.final_heldout_accuracy.unwrap());

    let eval = evaluate(&model, &heldout_set)?;
    println!(
        "heldout confusion: tp {} tn {} fp {} fn {}",
        eval.true_positives, eval.true_negatives, eval.false_positives, eval.false_negatives
    );

    // The analytic gradient matches central finite differences.
    let worst = gradient_check(&model, &train_set.features[0], train_set.labels[0]);
    println!("gradient check worst relative error: {worst:.2e}");
    Ok(())
}
