//! Simulate contact scenarios and compare the grasp score against the
//! shake-until-drop endurance score.
//!
//! ```bash
//! cargo run -p graspkit --example shake_scenarios
//! ```

use graspkit::shake::{
    endurance_hold_time, endurance_score, simulate_shake, ContactScenario, ShakeProtocol,
};
use graspkit::tactile::{categorize, grasp_score, MetricParams};

fn main() {
    let params = MetricParams::default();
    let protocol = ShakeProtocol::default();

    let scenarios = vec![
        ("perfectly stable", ContactScenario::slip(0.0, 1)),
        ("slight slip", ContactScenario::slip(150.0, 2)),
        ("heavy slip", ContactScenario::slip(900.0, 3)),
        ("drop at movement 1", ContactScenario::fall_after(1, 4)),
        ("drop at movement 4", ContactScenario::fall_after(4, 8)),
        ("closed on air", ContactScenario::no_contact(6)),
    ];

    println!(
        "{:<22} {:>8} {:>10} {:>10} {:>8}",
        "scenario", "score", "category", "hold time", "endure"
    );
    for (name, scenario) in &scenarios {
        let sim = simulate_shake(scenario);
        let score = grasp_score(&sim.image, &params);
        println!(
            "{:<22} {:>8.4} {:>10} {:>9.1}s {:>8.3}",
            name,
            score.value(),
            categorize(score).to_string(),
            endurance_hold_time(scenario, &protocol),
            endurance_score(scenario, &protocol),
        );
    }

    // The same scenario with the sensor noise turned off reproduces the
    // closed-form score exactly.
    let noiseless = ContactScenario::slip(400.0, 9).with_noise(0.0);
    let score = grasp_score(&simulate_shake(&noiseless).image, &params);
    let closed_form = 0.5 * (-400.0f64 / 1000.0).exp() + 0.5;
    println!(
        "\nnoiseless slip 400: score {:.12}, closed form {:.12}, diff {:.2e}",
        score.value(),
        closed_form,
        (score.value() - closed_form).abs()
    );
}
