//! Tactile grasp-quality metric.
//!
//! A grasp is probed by a fixed protocol of four perturbation movements while
//! a 5-taxel strip sensor records pressure, giving a 5x5 tactile image: one
//! row per time step (row 0 before any movement), one column per contact
//! point. Two small convolution kernels extract the failure signatures:
//!
//! * the *time kernel* differences consecutive rows at a fixed point and
//!   locates the movement at which the object dropped;
//! * the *space kernel* differences adjacent points across consecutive rows
//!   and accumulates the magnitude of slip.
//!
//! The continuous score in [0, 1] is then
//!
//! ```text
//! 0                       if no contact was ever established
//! 0.5 * i / 5             if the object fell at movement i
//! 0.5 * e^(-x/1000) + 0.5 otherwise, with x the accumulated slip
//! ```
//!
//! and is bucketed into four stability categories: failure (score 0),
//! falling (0, 0.5], slippery (0.5, 0.85], stable (0.85, 1].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rows in a tactile image: the initial measurement plus one per movement.
pub const TIME_STEPS: usize = 5;
/// Columns in a tactile image: contact points along the sensor strip.
pub const CONTACT_POINTS: usize = 5;
/// Perturbation movements in the shake protocol.
pub const MOVEMENTS: usize = TIME_STEPS - 1;

/// Scores strictly above this are categorized stable.
pub const STABLE_BOUNDARY: f64 = 0.85;
/// Scores in (0, FALL_BOUNDARY] are categorized falling.
pub const FALL_BOUNDARY: f64 = 0.5;

#[derive(Debug, Error)]
pub enum TactileError {
    #[error("tactile image must be {TIME_STEPS}x{CONTACT_POINTS}, got {rows} rows x {cols} columns")]
    WrongShape { rows: usize, cols: usize },
    #[error("tactile image entry at row {row}, point {point} is {value}, expected finite and >= 0")]
    BadEntry { row: usize, point: usize, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("grasp score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("invalid metric parameters: {0}")]
    BadParams(String),
}

/// 5x5 pressure matrix; row = time step, column = contact point.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileImage {
    rows: [[f64; CONTACT_POINTS]; TIME_STEPS],
}

impl TactileImage {
    /// Validates shape implicitly via the array type; checks entries are
    /// finite and non-negative.
    pub fn from_rows(rows: [[f64; CONTACT_POINTS]; TIME_STEPS]) -> Result<Self, TactileError> {
        for (t, row) in rows.iter().enumerate() {
            for (p, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(TactileError::BadEntry { row: t, point: p, value });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn constant(value: f64) -> Result<Self, TactileError> {
        Self::from_rows([[value; CONTACT_POINTS]; TIME_STEPS])
    }

    pub fn get(&self, time: usize, point: usize) -> f64 {
        self.rows[time][point]
    }

    pub fn rows(&self) -> &[[f64; CONTACT_POINTS]; TIME_STEPS] {
        &self.rows
    }

    /// Parses the plain-text format: 5 lines of 5 comma-separated decimal
    /// values, row 0 first. Rejects wrong shapes and negative values.
    pub fn parse_csv(text: &str) -> Result<Self, TactileError> {
        let mut rows = [[0.0; CONTACT_POINTS]; TIME_STEPS];
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != TIME_STEPS {
            return Err(TactileError::WrongShape { rows: lines.len(), cols: CONTACT_POINTS });
        }
        for (t, line) in lines.iter().enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != CONTACT_POINTS {
                return Err(TactileError::WrongShape { rows: TIME_STEPS, cols: fields.len() });
            }
            for (p, field) in fields.iter().enumerate() {
                let value: f64 = field.parse().map_err(|_| TactileError::Parse {
                    line: t + 1,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                rows[t][p] = value;
            }
        }
        Self::from_rows(rows)
    }

    /// Formats as the 5-line comma-separated text accepted by `parse_csv`.
    /// Values round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parameters of the metric. Only the contact threshold is genuinely
/// tunable; the remaining constants define the score formula and the
/// category boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Pressure below this at every point means no contact at that time step.
    pub contact_threshold: f64,
    /// Exponential decay constant of the slip branch.
    pub decay_constant: f64,
    /// Divisor of the falling branch (score = 0.5 * i / fall_divisor).
    pub fall_divisor: f64,
    /// Upper boundary of the slippery category.
    pub stable_boundary: f64,
    /// Upper boundary of the falling category.
    pub fall_boundary: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            contact_threshold: 1.0,
            decay_constant: 1000.0,
            fall_divisor: MOVEMENTS as f64 + 1.0,
            stable_boundary: STABLE_BOUNDARY,
            fall_boundary: FALL_BOUNDARY,
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<(), TactileError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.contact_threshold) {
            return Err(TactileError::BadParams("contact threshold must be > 0".into()));
        }
        if !positive(self.decay_constant) {
            return Err(TactileError::BadParams("decay constant must be > 0".into()));
        }
        // The falling branch must stay inside (0, 1] for i in 1..=4.
        if !(self.fall_divisor.is_finite() && self.fall_divisor >= 2.0) {
            return Err(TactileError::BadParams("fall divisor must be >= 2".into()));
        }
        if !(0.0 < self.fall_boundary && self.fall_boundary < self.stable_boundary && self.stable_boundary < 1.0)
        {
            return Err(TactileError::BadParams(
                "boundaries must satisfy 0 < fall < stable < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Continuous grasp quality in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraspScore(f64);

impl GraspScore {
    pub const ZERO: GraspScore = GraspScore(0.0);

    pub fn new(value: f64) -> Result<Self, TactileError> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(TactileError::ScoreOutOfRange(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Four-way stability categorization of a grasp score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityCategory {
    Failure,
    Falling,
    Slippery,
    Stable,
}

impl std::fmt::Display for StabilityCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StabilityCategory::Failure => "failure",
            StabilityCategory::Falling => "falling",
            StabilityCategory::Slippery => "slippery",
            StabilityCategory::Stable => "stable",
        };
        f.write_str(name)
    }
}

/// Row-difference matrix produced by the time kernel: entry (t, p) is the
/// pressure change at point p across movement t+1.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDiff {
    values: [[f64; CONTACT_POINTS]; MOVEMENTS],
}

impl TimeDiff {
    pub fn get(&self, movement: usize, point: usize) -> f64 {
        self.values[movement][point]
    }

    pub fn values(&self) -> &[[f64; CONTACT_POINTS]; MOVEMENTS] {
        &self.values
    }
}

/// Adjacent-point differential matrix produced by the space kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDiff {
    values: [[f64; CONTACT_POINTS - 1]; MOVEMENTS],
}

impl SpaceDiff {
    pub fn get(&self, movement: usize, pair: usize) -> f64 {
        self.values[movement][pair]
    }

    pub fn values(&self) -> &[[f64; CONTACT_POINTS - 1]; MOVEMENTS] {
        &self.values
    }
}

/// Applies the (-1, +1) time kernel down each column:
/// `D[t][p] = img[t+1][p] - img[t][p]`.
#[allow(clippy::needless_range_loop)]
pub fn time_convolve(img: &TactileImage) -> TimeDiff {
    let mut values = [[0.0; CONTACT_POINTS]; MOVEMENTS];
    for t in 0..MOVEMENTS {
        for p in 0..CONTACT_POINTS {
            values[t][p] = img.get(t + 1, p) - img.get(t, p);
        }
    }
    TimeDiff { values }
}

/// Applies the 2x2 kernel [[+1, -1], [-1, +1]] over adjacent points and
/// consecutive rows:
/// `S[t][p] = (img[t][p] - img[t][p+1]) - (img[t+1][p] - img[t+1][p+1])`.
#[allow(clippy::needless_range_loop)]
pub fn space_convolve(img: &TactileImage) -> SpaceDiff {
    let mut values = [[0.0; CONTACT_POINTS - 1]; MOVEMENTS];
    for t in 0..MOVEMENTS {
        for p in 0..CONTACT_POINTS - 1 {
            values[t][p] = (img.get(t, p) - img.get(t, p + 1))
                - (img.get(t + 1, p) - img.get(t + 1, p + 1));
        }
    }
    SpaceDiff { values }
}

/// Total slip magnitude: the sum of absolute values of all 16
/// space-kernel outputs. Opposite slips accumulate rather than cancel.
pub fn slip_magnitude(img: &TactileImage) -> f64 {
    space_convolve(img)
        .values
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v.abs())
        .sum()
}

/// True when no contact was established before shaking: every entry of
/// row 0 is below the contact threshold.
pub fn detect_failure(img: &TactileImage, params: &MetricParams) -> bool {
    (0..CONTACT_POINTS).all(|p| img.get(0, p) < params.contact_threshold)
}

/// Detects a drop during the protocol. Falling is flagged when some row
/// t in 1..=4 has every entry below the contact threshold; the returned
/// index i in 1..=4 is the movement with the largest absolute pressure
/// change (ties broken by the earliest movement).
///
/// Requires an image with initial contact; call `detect_failure` first.
/// Panics if the precondition is violated.
pub fn detect_falling(img: &TactileImage, params: &MetricParams) -> Option<usize> {
    assert!(
        !detect_failure(img, params),
        "detect_falling requires an image with initial contact"
    );
    let empty_row_exists = (1..TIME_STEPS)
        .any(|t| (0..CONTACT_POINTS).all(|p| img.get(t, p) < params.contact_threshold));
    if !empty_row_exists {
        return None;
    }
    let diffs = time_convolve(img);
    let mut best_movement = 0usize;
    let mut best_magnitude = f64::NEG_INFINITY;
    for t in 0..MOVEMENTS {
        let row_max = (0..CONTACT_POINTS)
            .map(|p| diffs.get(t, p).abs())
            .fold(0.0f64, f64::max);
        if row_max > best_magnitude {
            best_magnitude = row_max;
            best_movement = t;
        }
    }
    Some(best_movement + 1)
}

/// The grasp-quality score: 0 on failure, `0.5 * i / 5` when the object
/// fell at movement i, `0.5 * e^(-x/1000) + 0.5` otherwise.
pub fn grasp_score(img: &TactileImage, params: &MetricParams) -> GraspScore {
    if detect_failure(img, params) {
        return GraspScore::ZERO;
    }
    if let Some(i) = detect_falling(img, params) {
        return GraspScore::new(0.5 * i as f64 / params.fall_divisor)
            .expect("falling score in range for validated params");
    }
    let x = slip_magnitude(img);
    GraspScore::new(0.5 * (-x / params.decay_constant).exp() + 0.5)
        .expect("slip score in range")
}

/// Interval membership at the canonical boundaries; 0.5 and 0.85 belong
/// to the lower category.
pub fn categorize(score: GraspScore) -> StabilityCategory {
    let v = score.value();
    if v == 0.0 {
        StabilityCategory::Failure
    } else if v <= FALL_BOUNDARY {
        StabilityCategory::Falling
    } else if v <= STABLE_BOUNDARY {
        StabilityCategory::Slippery
    } else {
        StabilityCategory::Stable
    }
}
