//! Synthetic 400x300 tabletop scenes and the ground-truth grasp oracle.
//!
//! Scenes hold parameterized objects (disc, rectangle, capsule) rasterized
//! onto an 8-bit grayscale image. The oracle maps a grasp configuration to
//! the [`ContactScenario`] the physical world would produce: it checks
//! whether the parallel-jaw segment reaches an object, how far off-center
//! and how misaligned the grasp is, and turns that into a no-contact, fall,
//! or slip outcome. The presets keep stability inferable from appearance
//! alone: heavier objects are darker, and the slip-prone presets are the
//! elongated ones whose pose is readable at patch resolution.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::GrayImage;
use crate::rng::{mix_seed, SplitMix64};
use crate::shake::{ContactScenario, ScenarioMode, DEFAULT_CONTACT_MASK};
use crate::tactile::MetricParams;

pub const SCENE_WIDTH: usize = 400;
pub const SCENE_HEIGHT: usize = 300;
pub const BACKGROUND_INTENSITY: u8 = 200;
/// Required clearance between a placed footprint and the scene border.
pub const PLACEMENT_MARGIN: i64 = 10;
/// Attempts per object before random placement gives up.
pub const PLACEMENT_ATTEMPTS: usize = 1000;
/// Discrete grasp angles in degrees, 180-periodic for a two-finger gripper.
pub const GRASP_ANGLES_DEG: [u16; 6] = [0, 30, 60, 90, 120, 150];

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown object id {0:?}")]
    UnknownObject(String),
    #[error("invalid object {id}: {message}")]
    BadObject { id: String, message: String },
    #[error("object {id} footprint leaves the scene at pose ({u}, {v})")]
    OutOfBounds { id: String, u: i32, v: i32 },
    #[error("objects {a} and {b} overlap")]
    Overlap { a: String, b: String },
    #[error("no non-overlapping placement found for {id} after {PLACEMENT_ATTEMPTS} attempts")]
    PlacementInfeasible { id: String },
    #[error("at most {max} objects per scene, got {got}")]
    TooManyObjects { max: usize, got: usize },
    #[error("grasp angle {0} not in {GRASP_ANGLES_DEG:?}")]
    BadAngle(u16),
    #[error("grasp point ({u}, {v}) outside {width}x{height}")]
    GraspOutOfBounds { u: i32, v: i32, width: usize, height: usize },
    #[error("preset line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disc,
    Rectangle,
    Capsule,
}

impl Shape {
    fn as_str(self) -> &'static str {
        match self {
            Shape::Disc => "disc",
            Shape::Rectangle => "rectangle",
            Shape::Capsule => "capsule",
        }
    }

    fn parse(s: &str) -> Option<Shape> {
        match s {
            "disc" => Some(Shape::Disc),
            "rectangle" => Some(Shape::Rectangle),
            "capsule" => Some(Shape::Capsule),
            _ => None,
        }
    }
}

/// A graspable object: geometry, mass and surface properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: String,
    pub name: String,
    pub shape: Shape,
    /// Half-extents in pixels: (along local x, along local y). Discs use
    /// the first as radius; capsules require ext1 >= ext2.
    pub half_extents: (f64, f64),
    pub mass_grams: f64,
    /// Surface friction in (0, 1].
    pub friction: f64,
    /// Rendered intensity; darker presets are heavier.
    pub albedo: u8,
    /// Slip-proneness scale factor, >= 0.
    pub slip_prone: f64,
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |message: String| SceneError::BadObject { id: self.id.clone(), message };
        if self.half_extents.0 < 4.0 || self.half_extents.1 < 4.0 {
            return Err(bad(format!("half-extents {:?} must be >= 4 px", self.half_extents)));
        }
        if self.shape == Shape::Capsule && self.half_extents.0 < self.half_extents.1 {
            return Err(bad("capsule requires ext1 >= ext2".into()));
        }
        if !(self.mass_grams.is_finite() && self.mass_grams > 0.0) {
            return Err(bad(format!("mass {} must be > 0", self.mass_grams)));
        }
        if !(self.friction > 0.0 && self.friction <= 1.0) {
            return Err(bad(format!("friction {} must be in (0, 1]", self.friction)));
        }
        if !(self.slip_prone >= 0.0 && self.slip_prone.is_finite()) {
            return Err(bad(format!("slip_prone {} must be >= 0", self.slip_prone)));
        }
        Ok(())
    }

    /// Radius of the smallest origin-centered circle containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        let (e1, e2) = self.half_extents;
        match self.shape {
            Shape::Disc => e1,
            Shape::Rectangle => (e1 * e1 + e2 * e2).sqrt(),
            Shape::Capsule => e1,
        }
    }
}

/// Position and orientation of one object in a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub object_id: String,
    pub u: i32,
    pub v: i32,
    pub orientation_deg: f64,
}

/// An object bound to its pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub spec: ObjectSpec,
    pub u: i32,
    pub v: i32,
    pub orientation_deg: f64,
}

impl Placement {
    /// True when the world point (x, y) lies inside the object footprint.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.u as f64;
        let dy = y - self.v as f64;
        let (e1, e2) = self.spec.half_extents;
        match self.spec.shape {
            Shape::Disc => dx * dx + dy * dy < e1 * e1,
            _ => {
                let rad = self.orientation_deg.to_radians();
                let (sin, cos) = rad.sin_cos();
                let lx = dx * cos + dy * sin;
                let ly = -dx * sin + dy * cos;
                match self.spec.shape {
                    Shape::Rectangle => lx.abs() < e1 && ly.abs() < e2,
                    Shape::Capsule => {
                        let h = e1 - e2;
                        let t = lx.clamp(-h, h);
                        (lx - t) * (lx - t) + ly * ly < e2 * e2
                    }
                    Shape::Disc => unreachable!(),
                }
            }
        }
    }

    /// Direction (degrees, 180-periodic) a parallel-jaw gripper should close
    /// along: the short axis of elongated shapes. None for discs.
    pub fn preferred_grasp_axis_deg(&self) -> Option<f64> {
        match self.spec.shape {
            Shape::Disc => None,
            _ => {
                let (e1, e2) = self.spec.half_extents;
                let axis = if e1 >= e2 {
                    self.orientation_deg + 90.0
                } else {
                    self.orientation_deg
                };
                Some(axis.rem_euclid(180.0))
            }
        }
    }

    /// Integer pixels covered by the footprint.
    fn footprint_pixels(&self) -> Vec<(i64, i64)> {
        let r = self.spec.bounding_radius().ceil() as i64 + 1;
        let (cu, cv) = (self.u as i64, self.v as i64);
        let mut pixels = Vec::new();
        for y in cv - r..=cv + r {
            for x in cu - r..=cu + r {
                if self.contains(x as f64, y as f64) {
                    pixels.push((x, y));
                }
            }
        }
        pixels
    }
}

/// A rendered tabletop: the 400x300 raster plus the placements behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub image: GrayImage,
    pub placements: Vec<Placement>,
}

impl Scene {
    pub fn empty() -> Scene {
        Scene {
            image: GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, BACKGROUND_INTENSITY),
            placements: Vec::new(),
        }
    }
}

fn lookup<'a>(objects: &'a [ObjectSpec], id: &str) -> Result<&'a ObjectSpec, SceneError> {
    objects
        .iter()
        .find(|o| o.id == id)
        .ok_or_else(|| SceneError::UnknownObject(id.to_string()))
}

/// Rasterizes poses onto a fresh background-200 scene. Rejects poses whose
/// footprints leave the image or overlap a previously placed object.
/// Rasterization is per-pixel membership with no anti-aliasing.
pub fn render_scene(objects: &[ObjectSpec], poses: &[Pose]) -> Result<Scene, SceneError> {
    let mut image = GrayImage::new(SCENE_WIDTH, SCENE_HEIGHT, BACKGROUND_INTENSITY);
    let mut occupancy: Vec<Option<usize>> = vec![None; SCENE_WIDTH * SCENE_HEIGHT];
    let mut placements: Vec<Placement> = Vec::with_capacity(poses.len());

    for pose in poses {
        let spec = lookup(objects, &pose.object_id)?;
        spec.validate()?;
        let placement = Placement {
            spec: spec.clone(),
            u: pose.u,
            v: pose.v,
            orientation_deg: pose.orientation_deg,
        };
        let pixels = placement.footprint_pixels();
        for &(x, y) in &pixels {
            if x < 0 || y < 0 || x as usize >= SCENE_WIDTH || y as usize >= SCENE_HEIGHT {
                return Err(SceneError::OutOfBounds { id: spec.id.clone(), u: pose.u, v: pose.v });
            }
            if let Some(other) = occupancy[y as usize * SCENE_WIDTH + x as usize] {
                return Err(SceneError::Overlap {
                    a: placements[other].spec.id.clone(),
                    b: spec.id.clone(),
                });
            }
        }
        let index = placements.len();
        for &(x, y) in &pixels {
            occupancy[y as usize * SCENE_WIDTH + x as usize] = Some(index);
            image.set(x as usize, y as usize, spec.albedo);
        }
        placements.push(placement);
    }

    Ok(Scene { image, placements })
}

/// Seeded rejection sampling of non-overlapping poses with at least
/// 10 px clearance from every border. Deterministic given the seed.
pub fn place_objects_random(objects: &[ObjectSpec], seed: u64) -> Result<Vec<Pose>, SceneError> {
    if objects.len() > 5 {
        return Err(SceneError::TooManyObjects { max: 5, got: objects.len() });
    }
    let mut rng = SplitMix64::new(seed);
    let mut occupied: Vec<bool> = vec![false; SCENE_WIDTH * SCENE_HEIGHT];
    let mut poses = Vec::with_capacity(objects.len());

    for spec in objects {
        spec.validate()?;
        let reach = spec.bounding_radius().ceil() as i64 + 1;
        let lo_x = PLACEMENT_MARGIN + reach;
        let hi_x = SCENE_WIDTH as i64 - 1 - PLACEMENT_MARGIN - reach;
        let lo_y = PLACEMENT_MARGIN + reach;
        let hi_y = SCENE_HEIGHT as i64 - 1 - PLACEMENT_MARGIN - reach;
        if lo_x > hi_x || lo_y > hi_y {
            return Err(SceneError::PlacementInfeasible { id: spec.id.clone() });
        }

        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let u = (lo_x + rng.next_below((hi_x - lo_x + 1) as usize) as i64) as i32;
            let v = (lo_y + rng.next_below((hi_y - lo_y + 1) as usize) as i64) as i32;
            let orientation_deg = rng.range_f64(0.0, 180.0);
            let placement =
                Placement { spec: spec.clone(), u, v, orientation_deg };
            let pixels = placement.footprint_pixels();
            let fits = pixels.iter().all(|&(x, y)| {
                x >= PLACEMENT_MARGIN
                    && y >= PLACEMENT_MARGIN
                    && x < SCENE_WIDTH as i64 - PLACEMENT_MARGIN
                    && y < SCENE_HEIGHT as i64 - PLACEMENT_MARGIN
                    && !occupied[y as usize * SCENE_WIDTH + x as usize]
            });
            if fits {
                for &(x, y) in &pixels {
                    occupied[y as usize * SCENE_WIDTH + x as usize] = true;
                }
                poses.push(Pose { object_id: spec.id.clone(), u, v, orientation_deg });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SceneError::PlacementInfeasible { id: spec.id.clone() });
        }
    }
    Ok(poses)
}

/// Pixel position and discrete angle of a proposed parallel-jaw grasp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraspConfiguration {
    pub u: i32,
    pub v: i32,
    pub angle_deg: u16,
}

impl GraspConfiguration {
    pub fn new(u: i32, v: i32, angle_deg: u16) -> Result<Self, SceneError> {
        if !GRASP_ANGLES_DEG.contains(&angle_deg) {
            return Err(SceneError::BadAngle(angle_deg));
        }
        Ok(Self { u, v, angle_deg })
    }

    pub fn angle_rad(&self) -> f64 {
        (self.angle_deg as f64).to_radians()
    }

    pub fn validate_within(&self, width: usize, height: usize) -> Result<(), SceneError> {
        if !GRASP_ANGLES_DEG.contains(&self.angle_deg) {
            return Err(SceneError::BadAngle(self.angle_deg));
        }
        if self.u < 0 || self.v < 0 || self.u as usize >= width || self.v as usize >= height {
            return Err(SceneError::GraspOutOfBounds { u: self.u, v: self.v, width, height });
        }
        Ok(())
    }
}

/// Constants of the ground-truth oracle, centralized so tests can pin them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// Jaw opening: length of the contact segment, in pixels.
    pub gripper_width: f64,
    /// Off-center distance beyond which the grasp drops the object.
    pub fall_distance: f64,
    /// Base pressure handed to generated contact scenarios.
    pub base_pressure: f64,
    /// Sensor noise handed to generated contact scenarios.
    pub noise_std: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { gripper_width: 80.0, fall_distance: 30.0, base_pressure: 100.0, noise_std: 0.5 }
    }
}

impl OracleParams {
    pub fn noiseless(mut self) -> Self {
        self.noise_std = 0.0;
        self
    }
}

/// Movement index at which an off-center grasp drops its object: farther
/// off-center falls sooner.
pub fn fall_index_for_distance(d: f64, fall_distance: f64) -> u8 {
    let raw = 4.0 * (1.0 - (d - fall_distance) / fall_distance);
    (raw.round() as i64).clamp(1, 4) as u8
}

/// Slip magnitude of an in-tolerance grasp: grows with off-center distance
/// and angular misalignment, scaled by the object's slip-proneness and mass
/// and damped by friction.
pub fn slip_for_grasp(spec: &ObjectSpec, d: f64, theta_deg: f64, fall_distance: f64) -> f64 {
    spec.slip_prone * spec.mass_grams * (d / fall_distance + theta_deg / 90.0) / spec.friction
}

/// Ground-truth outcome of executing a grasp on a scene.
///
/// The jaw segment is the `gripper_width`-long segment centered at (u, v)
/// and perpendicular to the grasp angle. If it touches no footprint the
/// grasp is a no-contact failure. Otherwise, for the object contacted
/// closest to the grasp center, `d` is the distance from (u, v) to the
/// object centroid projected onto the jaw axis and `theta` the angular
/// misalignment from the preferred grasp axis folded into [0, 90]. Grasps
/// with `d` beyond `fall_distance` drop the object; the rest slip by
/// `slip_for_grasp`. Deterministic given the trial seed.
pub fn ground_truth_outcome(
    scene: &Scene,
    config: &GraspConfiguration,
    params: &OracleParams,
    trial_seed: u64,
) -> ContactScenario {
    config
        .validate_within(scene.image.width(), scene.image.height())
        .expect("grasp configuration must lie inside the scene");

    let angle = config.angle_rad();
    // Jaw axis: perpendicular to the grasp closing direction.
    let jaw = (-angle.sin(), angle.cos());
    let half = params.gripper_width / 2.0;
    let (u, v) = (config.u as f64, config.v as f64);

    let mut contacted: Option<(usize, f64)> = None;
    let steps = (params.gripper_width * 2.0) as i64; // half-pixel sampling
    for i in 0..=steps {
        let t = -half + i as f64 * (params.gripper_width / steps as f64);
        let (x, y) = (u + t * jaw.0, v + t * jaw.1);
        for (idx, placement) in scene.placements.iter().enumerate() {
            if placement.contains(x, y) {
                let closer = match contacted {
                    Some((_, best)) => t.abs() < best,
                    None => true,
                };
                if closer {
                    contacted = Some((idx, t.abs()));
                }
            }
        }
    }

    let scenario = |mode: ScenarioMode| ContactScenario {
        mode,
        base_pressure: params.base_pressure,
        contact_mask: DEFAULT_CONTACT_MASK,
        noise_std: params.noise_std,
        seed: trial_seed,
    };

    let Some((index, _)) = contacted else {
        return scenario(ScenarioMode::NoContact);
    };
    let placement = &scene.placements[index];

    let offset = (placement.u as f64 - u, placement.v as f64 - v);
    let d = (offset.0 * jaw.0 + offset.1 * jaw.1).abs();
    let theta = match placement.preferred_grasp_axis_deg() {
        None => 0.0,
        Some(pref) => {
            let diff = (config.angle_deg as f64 - pref).rem_euclid(180.0);
            diff.min(180.0 - diff)
        }
    };

    if d > params.fall_distance {
        scenario(ScenarioMode::FallAfter(fall_index_for_distance(d, params.fall_distance)))
    } else {
        scenario(ScenarioMode::Slip(slip_for_grasp(&placement.spec, d, theta, params.fall_distance)))
    }
}

/// The five calibrated object presets used throughout the experiments.
pub fn known_object_presets() -> Vec<ObjectSpec> {
    vec![
        ObjectSpec {
            id: "screw".into(),
            name: "Screw".into(),
            shape: Shape::Capsule,
            half_extents: (58.0, 12.0),
            mass_grams: 292.52,
            friction: 0.457,
            albedo: 52,
            slip_prone: 1.0,
        },
        ObjectSpec {
            id: "yogurt".into(),
            name: "Yogurt".into(),
            shape: Shape::Capsule,
            half_extents: (54.0, 13.0),
            mass_grams: 211.72,
            friction: 0.317,
            albedo: 66,
            slip_prone: 0.9,
        },
        ObjectSpec {
            id: "tennis_container".into(),
            name: "Tennis container".into(),
            shape: Shape::Capsule,
            half_extents: (60.0, 16.0),
            mass_grams: 221.10,
            friction: 0.434,
            albedo: 62,
            slip_prone: 1.1,
        },
        ObjectSpec {
            id: "flashlight".into(),
            name: "Flashlight".into(),
            shape: Shape::Rectangle,
            half_extents: (52.0, 13.0),
            mass_grams: 76.52,
            friction: 0.311,
            albedo: 70,
            slip_prone: 2.6,
        },
        ObjectSpec {
            id: "metal_bar".into(),
            name: "Metal bar".into(),
            shape: Shape::Rectangle,
            half_extents: (62.0, 12.0),
            mass_grams: 222.62,
            friction: 0.337,
            albedo: 58,
            slip_prone: 1.0,
        },
    ]
}

/// Object presets plus the oracle and metric parameters: everything the
/// experiments need to stand in for the physical robot loop.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub objects: Vec<ObjectSpec>,
    pub oracle: OracleParams,
    pub metric: MetricParams,
}

impl World {
    pub fn known() -> World {
        World {
            objects: known_object_presets(),
            oracle: OracleParams::default(),
            metric: MetricParams::default(),
        }
    }

    pub fn object(&self, id: &str) -> Result<&ObjectSpec, SceneError> {
        lookup(&self.objects, id)
    }

    /// Derived seed for a nested stream, namespaced under this world.
    pub fn derive_seed(&self, base: u64, parts: &[u64]) -> u64 {
        mix_seed(base, parts)
    }
}

/// Formats presets as `id,name,shape,ext1,ext2,mass,friction,albedo,slip_prone`.
pub fn format_presets(objects: &[ObjectSpec]) -> String {
    let mut out = String::new();
    for o in objects {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            o.id,
            o.name,
            o.shape.as_str(),
            o.half_extents.0,
            o.half_extents.1,
            o.mass_grams,
            o.friction,
            o.albedo,
            o.slip_prone
        ));
    }
    out
}

pub fn parse_presets(text: &str) -> Result<Vec<ObjectSpec>, SceneError> {
    let mut objects = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(SceneError::Parse {
                line: idx + 1,
                message: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, SceneError> {
            s.parse().map_err(|_| SceneError::Parse {
                line: idx + 1,
                message: format!("cannot parse {what} {s:?}"),
            })
        };
        let shape = Shape::parse(fields[2]).ok_or_else(|| SceneError::Parse {
            line: idx + 1,
            message: format!("unknown shape {:?}", fields[2]),
        })?;
        let spec = ObjectSpec {
            id: fields[0].to_string(),
            name: fields[1].to_string(),
            shape,
            half_extents: (parse_f64(fields[3], "ext1")?, parse_f64(fields[4], "ext2")?),
            mass_grams: parse_f64(fields[5], "mass")?,
            friction: parse_f64(fields[6], "friction")?,
            albedo: fields[7].parse().map_err(|_| SceneError::Parse {
                line: idx + 1,
                message: format!("cannot parse albedo {:?}", fields[7]),
            })?,
            slip_prone: parse_f64(fields[8], "slip_prone")?,
        };
        spec.validate()?;
        objects.push(spec);
    }
    Ok(objects)
}

pub fn load_presets(path: &Path) -> Result<Vec<ObjectSpec>, SceneError> {
    let text = fs::read_to_string(path)
        .map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
    parse_presets(&text)
}

pub fn save_presets(objects: &[ObjectSpec], path: &Path) -> Result<(), SceneError> {
    fs::write(path, format_presets(objects))
        .map_err(|source| SceneError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shake::simulate_shake;
    use crate::tactile::grasp_score;

    fn disc(id: &str, radius: f64, albedo: u8) -> ObjectSpec {
        ObjectSpec {
            id: id.into(),
            name: id.into(),
            shape: Shape::Disc,
            half_extents: (radius, radius),
            mass_grams: 100.0,
            friction: 0.8,
            albedo,
            slip_prone: 0.5,
        }
    }

    fn pose(id: &str, u: i32, v: i32, deg: f64) -> Pose {
        Pose { object_id: id.into(), u, v, orientation_deg: deg }
    }

    #[test]
    fn empty_scene_is_uniform_background() {
        let scene = render_scene(&[], &[]).unwrap();
        assert!(scene.image.pixels().iter().all(|&p| p == BACKGROUND_INTENSITY));
    }

    #[test]
    fn disc_rasterization_matches_per_pixel_oracle() {
        let objects = vec![disc("d", 30.0, 80)];
        let scene = render_scene(&objects, &[pose("d", 200, 150, 0.0)]).unwrap();
        for y in 0..SCENE_HEIGHT {
            for x in 0..SCENE_WIDTH {
                let dx = x as f64 - 200.0;
                let dy = y as f64 - 150.0;
                let inside = dx * dx + dy * dy < 30.0 * 30.0;
                let expected = if inside { 80 } else { BACKGROUND_INTENSITY };
                assert_eq!(scene.image.pixel(x, y), expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn overlapping_poses_rejected() {
        let objects = vec![disc("a", 20.0, 80), disc("b", 20.0, 90)];
        let poses = vec![pose("a", 100, 100, 0.0), pose("b", 110, 100, 0.0)];
        assert!(matches!(render_scene(&objects, &poses), Err(SceneError::Overlap { .. })));
    }

    #[test]
    fn out_of_bounds_pose_rejected() {
        let objects = vec![disc("a", 20.0, 80)];
        assert!(matches!(
            render_scene(&objects, &[pose("a", 5, 100, 0.0)]),
            Err(SceneError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn placement_deterministic_and_non_overlapping() {
        let objects = known_object_presets();
        let a = place_objects_random(&objects, 7).unwrap();
        let b = place_objects_random(&objects, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        // Rendering validates margins and disjointness.
        let scene = render_scene(&objects, &a).unwrap();
        assert_eq!(scene.placements.len(), 5);
        // Pairwise footprint distance > 0: disjoint integer footprints
        // already imply a distance of at least one pixel.
        let footprints: Vec<std::collections::HashSet<(i64, i64)>> = scene
            .placements
            .iter()
            .map(|p| p.footprint_pixels().into_iter().collect())
            .collect();
        for i in 0..footprints.len() {
            for j in i + 1..footprints.len() {
                assert!(footprints[i].is_disjoint(&footprints[j]), "footprints {i} and {j}");
            }
        }
    }

    #[test]
    fn placement_of_zero_objects_is_empty() {
        assert!(place_objects_random(&[], 3).unwrap().is_empty());
    }

    #[test]
    fn too_many_objects_rejected() {
        let objects: Vec<ObjectSpec> =
            (0..6).map(|i| disc(&format!("o{i}"), 10.0, 50)).collect();
        assert!(matches!(
            place_objects_random(&objects, 1),
            Err(SceneError::TooManyObjects { .. })
        ));
    }

    #[test]
    fn grasp_on_empty_background_is_no_contact() {
        let scene = Scene::empty();
        let config = GraspConfiguration::new(200, 150, 0).unwrap();
        let outcome = ground_truth_outcome(&scene, &config, &OracleParams::default(), 1);
        assert_eq!(outcome.mode, ScenarioMode::NoContact);
    }

    #[test]
    fn centered_aligned_grasp_is_perfectly_stable() {
        let objects = known_object_presets();
        // Metal bar at orientation 90: long axis vertical, preferred grasp
        // axis horizontal (0 degrees).
        let scene =
            render_scene(&objects, &[pose("metal_bar", 200, 150, 90.0)]).unwrap();
        let config = GraspConfiguration::new(200, 150, 0).unwrap();
        let params = OracleParams::default().noiseless();
        let outcome = ground_truth_outcome(&scene, &config, &params, 1);
        assert_eq!(outcome.mode, ScenarioMode::Slip(0.0));
        let score = grasp_score(&simulate_shake(&outcome).image, &MetricParams::default());
        assert_eq!(score.value(), 1.0);
    }

    #[test]
    fn fall_index_formula() {
        assert_eq!(fall_index_for_distance(60.0, 30.0), 1); // d = 2 * d_fall
        assert_eq!(fall_index_for_distance(30.1, 30.0), 4);
        assert_eq!(fall_index_for_distance(37.5, 30.0), 3);
        assert_eq!(fall_index_for_distance(1000.0, 30.0), 1);
    }

    #[test]
    fn oracle_monotone_in_offset_and_misalignment() {
        let objects = known_object_presets();
        let scene = render_scene(&objects, &[pose("screw", 200, 150, 90.0)]).unwrap();
        let params = OracleParams::default().noiseless();
        let metric = MetricParams::default();
        // Preferred axis for the screw at orientation 90 is 0 degrees; the jaw
        // axis for angle 0 is vertical, so moving v off-center increases d.
        let mut last = f64::INFINITY;
        for dv in [0, 5, 10, 20, 28, 35, 60] {
            let config = GraspConfiguration::new(200, 150 + dv, 0).unwrap();
            let outcome = ground_truth_outcome(&scene, &config, &params, 1);
            let score = grasp_score(&simulate_shake(&outcome).image, &metric).value();
            assert!(score <= last + 1e-12, "score increased at dv={dv}");
            last = score;
        }
        // Misalignment never raises the score either.
        let aligned = ground_truth_outcome(
            &scene,
            &GraspConfiguration::new(200, 150, 0).unwrap(),
            &params,
            1,
        );
        let misaligned = ground_truth_outcome(
            &scene,
            &GraspConfiguration::new(200, 150, 60).unwrap(),
            &params,
            1,
        );
        match (aligned.mode, misaligned.mode) {
            (ScenarioMode::Slip(a), ScenarioMode::Slip(b)) => assert!(b > a),
            other => panic!("expected slip outcomes, got {other:?}"),
        }
    }

    #[test]
    fn oracle_invariant_under_joint_translation() {
        let objects = known_object_presets();
        let scene_a =
            render_scene(&objects, &[pose("tennis_container", 180, 140, 30.0)]).unwrap();
        let scene_b =
            render_scene(&objects, &[pose("tennis_container", 220, 170, 30.0)]).unwrap();
        let params = OracleParams::default();
        for angle in GRASP_ANGLES_DEG {
            let ca = GraspConfiguration::new(185, 133, angle).unwrap();
            let cb = GraspConfiguration::new(225, 163, angle).unwrap();
            let oa = ground_truth_outcome(&scene_a, &ca, &params, 9);
            let ob = ground_truth_outcome(&scene_b, &cb, &params, 9);
            assert_eq!(oa.mode, ob.mode, "angle {angle}");
        }
    }

    #[test]
    fn presets_csv_round_trip() {
        let objects = known_object_presets();
        let parsed = parse_presets(&format_presets(&objects)).unwrap();
        assert_eq!(parsed, objects);
        assert!(parse_presets("bad,line\n").is_err());
        assert!(parse_presets("a,A,hexagon,10,10,1,0.5,10,0\n").is_err());
    }

    #[test]
    fn presets_albedo_tracks_mass() {
        let mut objects = known_object_presets();
        objects.sort_by(|a, b| a.mass_grams.partial_cmp(&b.mass_grams).unwrap());
        for w in objects.windows(2) {
            assert!(w[0].albedo >= w[1].albedo, "heavier objects must be darker");
        }
    }
}
