//! Score hand-built tactile images and walk through the metric's parts.
//!
//! ```bash
//! cargo run -p graspkit --example tactile_score
//! ```

use graspkit::tactile::{
    categorize, detect_failure, detect_falling, grasp_score, slip_magnitude, MetricParams,
    TactileImage,
};

fn report(name: &str, image: &TactileImage, params: &MetricParams) {
    let score = grasp_score(image, params);
    println!("{name}:");
    println!("  no contact: {}", detect_failure(image, params));
    if !detect_failure(image, params) {
        println!("  fell at movement: {:?}", detect_falling(image, params));
        println!("  slip magnitude: {:.2}", slip_magnitude(image));
    }
    println!("  score {:.4} -> {}", score.value(), categorize(score));
}

fn main() {
    let params = MetricParams::default();

    // A firm grasp: pressure constant through all four movements.
    let stable = TactileImage::from_rows([[0.0, 100.0, 100.0, 100.0, 0.0]; 5]).unwrap();
    report("constant contact", &stable, &params);

    // The object slides between points 1 and 2 on every movement.
    let slip = TactileImage::from_rows([
        [0.0, 100.0, 100.0, 100.0, 0.0],
        [0.0, 40.0, 160.0, 100.0, 0.0],
        [0.0, 100.0, 100.0, 100.0, 0.0],
        [0.0, 40.0, 160.0, 100.0, 0.0],
        [0.0, 100.0, 100.0, 100.0, 0.0],
    ])
    .unwrap();
    report("oscillating slip", &slip, &params);

    // Pressure disappears after the second movement: the object fell.
    let fall = TactileImage::from_rows([
        [0.0, 100.0, 100.0, 100.0, 0.0],
        [0.0, 100.0, 100.0, 100.0, 0.0],
        [0.0, 100.0, 100.0, 100.0, 0.0],
        [0.0; 5],
        [0.0; 5],
    ])
    .unwrap();
    report("drop at movement 3", &fall, &params);

    // The jaws closed on air.
    let miss = TactileImage::constant(0.2).unwrap();
    report("no contact", &miss, &params);

    // The text format round-trips exactly.
    let csv = slip.to_csv();
    assert_eq!(TactileImage::parse_csv(&csv).unwrap(), slip);
    println!("\ntactile CSV of the slip image:\n{csv}");
}
