//! Deterministic stand-in for the physical shake protocol.
//!
//! A [`ContactScenario`] is the ground-truth physical outcome of a grasp:
//! no contact at all, a drop after movement k, or a slip of magnitude m.
//! [`simulate_shake`] synthesizes the tactile image such a grasp would
//! produce, constructed so that with zero noise the metric recovers the
//! scenario exactly. [`endurance_hold_time`] implements the shake-until-drop
//! benchmark: the grasp is shaken until the object drops or 300 seconds
//! elapse, and the hold time divided by 300 is the endurance score.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix_seed, SplitMix64};
use crate::tactile::{TactileImage, CONTACT_POINTS, MOVEMENTS, TIME_STEPS};

/// Hold-time cap of the endurance benchmark, in seconds.
pub const ENDURANCE_CAP_SECONDS: f64 = 300.0;

/// Default initial contact: a finger pad covering taxels 1..=3 of 5.
pub const DEFAULT_CONTACT_MASK: [bool; CONTACT_POINTS] = [false, true, true, true, false];

#[derive(Debug, Error)]
pub enum ShakeError {
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("invalid category mix: weights must be non-negative and not all zero")]
    BadMix,
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Physical outcome of a grasp, the simulator's input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "param")]
pub enum ScenarioMode {
    /// The jaws closed on air.
    NoContact,
    /// The object dropped at movement k in 1..=4.
    FallAfter(u8),
    /// The object slipped with total magnitude m >= 0; Slip(0) is a
    /// perfectly stable grasp.
    Slip(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactScenario {
    pub mode: ScenarioMode,
    /// Initial pressure at masked points, in sensor units.
    pub base_pressure: f64,
    /// Points initially in contact.
    pub contact_mask: [bool; CONTACT_POINTS],
    /// Standard deviation of per-cell sensor noise.
    pub noise_std: f64,
    pub seed: u64,
}

impl ContactScenario {
    pub fn no_contact(seed: u64) -> Self {
        Self {
            mode: ScenarioMode::NoContact,
            base_pressure: 100.0,
            contact_mask: DEFAULT_CONTACT_MASK,
            noise_std: 0.5,
            seed,
        }
    }

    pub fn fall_after(k: u8, seed: u64) -> Self {
        Self { mode: ScenarioMode::FallAfter(k), ..Self::no_contact(seed) }
    }

    pub fn slip(magnitude: f64, seed: u64) -> Self {
        Self { mode: ScenarioMode::Slip(magnitude), ..Self::no_contact(seed) }
    }

    pub fn with_noise(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn with_base_pressure(mut self, base_pressure: f64) -> Self {
        self.base_pressure = base_pressure;
        self
    }

    pub fn validate(&self) -> Result<(), ShakeError> {
        match self.mode {
            ScenarioMode::FallAfter(k) if !(1..=MOVEMENTS as u8).contains(&k) => {
                return Err(ShakeError::BadScenario(format!(
                    "fall movement index {k} outside 1..={MOVEMENTS}"
                )));
            }
            ScenarioMode::Slip(m) if !(m.is_finite() && m >= 0.0) => {
                return Err(ShakeError::BadScenario(format!("slip magnitude {m} must be >= 0")));
            }
            ScenarioMode::NoContact => {}
            _ => {
                if !self.contact_mask.iter().any(|&c| c) {
                    return Err(ShakeError::BadScenario("contact mask is empty".into()));
                }
            }
        }
        // Contact must register at the default metric threshold of 1.0.
        if !(self.base_pressure.is_finite() && self.base_pressure > 1.0) {
            return Err(ShakeError::BadScenario(format!(
                "base pressure {} must exceed the contact threshold (1)",
                self.base_pressure
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(ShakeError::BadScenario(format!(
                "noise std {} must be >= 0",
                self.noise_std
            )));
        }
        Ok(())
    }

    /// One scenario per line: `mode,param,base_pressure,noise_std,seed`
    /// with mode one of `nocontact`, `fall`, `slip`.
    pub fn parse_line(line: &str, line_no: usize) -> Result<Self, ShakeError> {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(ShakeError::Parse {
                line: line_no,
                message: format!("expected 5 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, ShakeError> {
            s.parse().map_err(|_| ShakeError::Parse {
                line: line_no,
                message: format!("cannot parse {what} {s:?}"),
            })
        };
        let mode = match fields[0] {
            "nocontact" => ScenarioMode::NoContact,
            "fall" => {
                let k: u8 = fields[1].parse().map_err(|_| ShakeError::Parse {
                    line: line_no,
                    message: format!("cannot parse fall index {:?}", fields[1]),
                })?;
                ScenarioMode::FallAfter(k)
            }
            "slip" => ScenarioMode::Slip(parse_f64(fields[1], "slip magnitude")?),
            other => {
                return Err(ShakeError::Parse {
                    line: line_no,
                    message: format!("unknown mode {other:?}, expected nocontact|fall|slip"),
                });
            }
        };
        let scenario = Self {
            mode,
            base_pressure: parse_f64(fields[2], "base pressure")?,
            contact_mask: DEFAULT_CONTACT_MASK,
            noise_std: parse_f64(fields[3], "noise std")?,
            seed: fields[4].parse().map_err(|_| ShakeError::Parse {
                line: line_no,
                message: format!("cannot parse seed {:?}", fields[4]),
            })?,
        };
        scenario.validate().map_err(|e| ShakeError::Parse { line: line_no, message: e.to_string() })?;
        Ok(scenario)
    }

    pub fn format_line(&self) -> String {
        let (mode, param) = match self.mode {
            ScenarioMode::NoContact => ("nocontact", "0".to_string()),
            ScenarioMode::FallAfter(k) => ("fall", format!("{k}")),
            ScenarioMode::Slip(m) => ("slip", format!("{m}")),
        };
        format!("{mode},{param},{},{},{}", self.base_pressure, self.noise_std, self.seed)
    }
}

/// Parses a scenario batch file, one scenario per line; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_scenario_batch(text: &str) -> Result<Vec<ContactScenario>, ShakeError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(ContactScenario::parse_line(trimmed, idx + 1)?);
    }
    Ok(out)
}

/// The fixed perturbation protocol: 4 movements (2 end-effector moves and
/// 2 joint shakes), each taking `movement_seconds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShakeProtocol {
    pub movement_seconds: f64,
}

impl Default for ShakeProtocol {
    fn default() -> Self {
        Self { movement_seconds: 2.0 }
    }
}

/// The synthesized tactile image plus a degeneracy flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedShake {
    pub image: TactileImage,
    /// Set when a slip transfer exceeded the available pressure and was
    /// clamped; the realized slip magnitude is then below the requested one.
    pub clamped: bool,
}

/// Position of the adjacent taxel pair used to realize a slip, plus the
/// number of nonzero space-kernel outputs a unit transfer produces there
/// (3 at the strip ends, 4 in the interior).
fn slip_pair(mask: &[bool; CONTACT_POINTS]) -> (usize, f64, bool) {
    match mask.iter().position(|&c| c) {
        Some(p) if p < CONTACT_POINTS - 1 => {
            let coeff = if p == 0 || p == CONTACT_POINTS - 2 { 3.0 } else { 4.0 };
            (p, coeff, false)
        }
        // Only the last taxel is masked: transfer leftward from it.
        _ => (CONTACT_POINTS - 2, 3.0, true),
    }
}

/// Per-movement transfer amount realizing a total slip of `magnitude`.
fn slip_transfer(magnitude: f64, mask: &[bool; CONTACT_POINTS]) -> f64 {
    let (_, coeff, _) = slip_pair(mask);
    magnitude / (MOVEMENTS as f64 * coeff)
}

/// Smallest base pressure that realizes a slip of `magnitude` without
/// clamping, never below the given floor.
pub fn base_pressure_for_slip(magnitude: f64, floor: f64) -> f64 {
    floor.max(2.0 * slip_transfer(magnitude, &DEFAULT_CONTACT_MASK))
}

/// Synthesizes the tactile image a scenario would produce. Deterministic
/// given the scenario seed; cell noise is drawn from a per-cell derived
/// stream so the image does not depend on evaluation order.
///
/// With zero noise the construction is exact: `Slip(m)` yields
/// `slip_magnitude == m` (up to float rounding) and `FallAfter(k)` yields a
/// falling index of exactly k. A slip transfer larger than the base pressure
/// is clamped and flagged.
pub fn simulate_shake(scenario: &ContactScenario) -> SimulatedShake {
    scenario.validate().expect("scenario must be valid");
    let noise = |t: usize, p: usize, rng_seed: u64| -> f64 {
        if scenario.noise_std == 0.0 {
            return 0.0;
        }
        let mut rng = SplitMix64::new(mix_seed(rng_seed, &[(t * CONTACT_POINTS + p) as u64]));
        rng.normal() * scenario.noise_std
    };
    let mut rows = [[0.0f64; CONTACT_POINTS]; TIME_STEPS];
    let mut clamped = false;

    match scenario.mode {
        ScenarioMode::NoContact => {
            for (t, row) in rows.iter_mut().enumerate() {
                for (p, cell) in row.iter_mut().enumerate() {
                    *cell = noise(t, p, scenario.seed).abs();
                }
            }
        }
        ScenarioMode::FallAfter(k) => {
            for (t, row) in rows.iter_mut().enumerate() {
                for (p, cell) in row.iter_mut().enumerate() {
                    if t < k as usize {
                        let base = if scenario.contact_mask[p] { scenario.base_pressure } else { 0.0 };
                        *cell = (base + noise(t, p, scenario.seed)).max(0.0);
                    } else {
                        *cell = noise(t, p, scenario.seed).abs();
                    }
                }
            }
        }
        ScenarioMode::Slip(magnitude) => {
            let (pair, _, source_is_right) = slip_pair(&scenario.contact_mask);
            let mut transfer = slip_transfer(magnitude, &scenario.contact_mask);
            if transfer > scenario.base_pressure {
                transfer = scenario.base_pressure;
                clamped = true;
            }
            // The masked endpoint of the pair gives pressure away on odd
            // movements and takes it back on even ones, so values stay in
            // range and each transition contributes exactly m/4 of slip.
            let (source, sink) = if source_is_right { (pair + 1, pair) } else { (pair, pair + 1) };
            for (t, row) in rows.iter_mut().enumerate() {
                let displaced = t % 2 == 1;
                for (p, cell) in row.iter_mut().enumerate() {
                    let base = if scenario.contact_mask[p] { scenario.base_pressure } else { 0.0 };
                    let structural = if displaced && p == source {
                        base - transfer
                    } else if displaced && p == sink {
                        base + transfer
                    } else {
                        base
                    };
                    *cell = (structural + noise(t, p, scenario.seed)).max(0.0);
                }
            }
        }
    }

    let image = TactileImage::from_rows(rows).expect("constructed image is valid");
    SimulatedShake { image, clamped }
}

/// Hold time of the endurance benchmark, in [0, 300] seconds:
/// no contact drops immediately, a fall holds for k movements, and a slip
/// of magnitude m holds for `300 * e^(-m/1000)` (any strictly decreasing
/// law preserves the rank comparison against the grasp score).
pub fn endurance_hold_time(scenario: &ContactScenario, protocol: &ShakeProtocol) -> f64 {
    match scenario.mode {
        ScenarioMode::NoContact => 0.0,
        ScenarioMode::FallAfter(k) => k as f64 * protocol.movement_seconds,
        ScenarioMode::Slip(m) => ENDURANCE_CAP_SECONDS * (-m / 1000.0).exp(),
    }
}

/// Hold time divided by the 300 s cap.
pub fn endurance_score(scenario: &ContactScenario, protocol: &ShakeProtocol) -> f64 {
    endurance_hold_time(scenario, protocol) / ENDURANCE_CAP_SECONDS
}

/// Relative frequencies of the three scenario modes in a sampled batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryMix {
    pub no_contact: f64,
    pub fall: f64,
    pub slip: f64,
}

impl Default for CategoryMix {
    fn default() -> Self {
        Self { no_contact: 0.2, fall: 0.3, slip: 0.5 }
    }
}

impl CategoryMix {
    pub fn all_slip() -> Self {
        Self { no_contact: 0.0, fall: 0.0, slip: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ShakeError> {
        let weights = [self.no_contact, self.fall, self.slip];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(ShakeError::BadMix);
        }
        Ok(())
    }
}

/// Draws `n` scenarios with modes distributed per the mix. Slip magnitudes
/// are log-uniform in [1, 5000] with the base pressure raised where needed
/// so the construction never clamps; fall indices are uniform in 1..=4.
/// Deterministic given (n, mix, seed).
pub fn sample_scenarios(
    n: usize,
    mix: &CategoryMix,
    seed: u64,
) -> Result<Vec<ContactScenario>, ShakeError> {
    mix.validate()?;
    let total = mix.no_contact + mix.fall + mix.slip;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    for index in 0..n {
        let scenario_seed = mix_seed(seed, &[index as u64]);
        let r = rng.next_f64() * total;
        let scenario = if r < mix.no_contact {
            ContactScenario::no_contact(scenario_seed)
        } else if r < mix.no_contact + mix.fall {
            let k = 1 + rng.next_below(MOVEMENTS) as u8;
            ContactScenario::fall_after(k, scenario_seed)
        } else {
            let m = rng.log_uniform(1.0, 5000.0);
            ContactScenario::slip(m, scenario_seed)
                .with_base_pressure(base_pressure_for_slip(m, 100.0))
        };
        out.push(scenario);
    }
    Ok(out)
}
