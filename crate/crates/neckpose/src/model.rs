//! Simplified cervical model: a thorax → C7..C1 → skull chain with seven
//! motion-capture markers and eight hyoid muscle paths.
//!
//! World frame: Y up, X forward, Z right (so exported files load in the
//! usual biomechanics tools). Total neck angles are split evenly over the
//! seven vertebral joints.

use nalgebra::{Point3, Rotation3, Vector3};

use crate::error::Error;
use crate::Result;

/// Number of vertebral joints (C7 up to C1).
pub const VERTEBRAL_JOINTS: usize = 7;

/// Number of motion-capture markers.
pub const MARKER_COUNT: usize = 7;

/// Number of hyoid muscle paths.
pub const MUSCLE_COUNT: usize = 8;

/// A body segment of the chain. `Vertebra(0)` is C7 (just above the
/// thorax), `Vertebra(6)` is C1 (just below the skull).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentId {
    Thorax,
    Vertebra(usize),
    Skull,
}

impl SegmentId {
    /// Index into the transforms returned by [`forward_kinematics`]:
    /// 0 = thorax, 1..=7 = C7..C1, 8 = skull.
    pub fn chain_index(self) -> usize {
        match self {
            SegmentId::Thorax => 0,
            SegmentId::Vertebra(v) => 1 + v,
            SegmentId::Skull => 1 + VERTEBRAL_JOINTS,
        }
    }

    /// Human-readable segment name (`thorax`, `C7`..`C1`, `skull`).
    pub fn name(self) -> String {
        match self {
            SegmentId::Thorax => "thorax".to_string(),
            SegmentId::Vertebra(v) => format!("C{}", VERTEBRAL_JOINTS - v),
            SegmentId::Skull => "skull".to_string(),
        }
    }
}

/// Total neck angles in radians.
///
/// * `pitch` — flexion negative, extension positive (about the Z/right axis)
/// * `roll` — right lateral bend positive (about the X/forward axis)
/// * `yaw` — left axial rotation positive (about the Y/up axis)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeckPose {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl NeckPose {
    pub const NEUTRAL: NeckPose = NeckPose {
        pitch: 0.0,
        roll: 0.0,
        yaw: 0.0,
    };

    pub fn new(pitch: f64, roll: f64, yaw: f64) -> Self {
        NeckPose { pitch, roll, yaw }
    }

    /// Angles as `[pitch, roll, yaw]`.
    pub fn to_array(self) -> [f64; 3] {
        [self.pitch, self.roll, self.yaw]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        NeckPose::new(a[0], a[1], a[2])
    }
}

/// Symmetric joint limits, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeOfMotion {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl Default for RangeOfMotion {
    fn default() -> Self {
        RangeOfMotion {
            pitch: 1.2,
            roll: 0.9,
            yaw: 1.4,
        }
    }
}

impl RangeOfMotion {
    /// Check a pose against the limits.
    pub fn check(&self, pose: &NeckPose) -> Result<()> {
        let checks = [
            ("pitch", pose.pitch, self.pitch),
            ("roll", pose.roll, self.roll),
            ("yaw", pose.yaw, self.yaw),
        ];
        for (angle, value, limit) in checks {
            if !value.is_finite() || value.abs() > limit {
                return Err(Error::RangeOfMotion {
                    angle,
                    value,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Clamp a pose into the limits component-wise.
    pub fn clamp(&self, pose: &NeckPose) -> NeckPose {
        NeckPose {
            pitch: pose.pitch.clamp(-self.pitch, self.pitch),
            roll: pose.roll.clamp(-self.roll, self.roll),
            yaw: pose.yaw.clamp(-self.yaw, self.yaw),
        }
    }

    pub fn limits(&self) -> [f64; 3] {
        [self.pitch, self.roll, self.yaw]
    }
}

/// A named marker attached to a segment at a fixed local offset (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub name: String,
    pub segment: SegmentId,
    pub offset: Vector3<f64>,
}

/// A straight-line muscle path with passive-spring tendon properties.
#[derive(Debug, Clone, PartialEq)]
pub struct MusclePath {
    pub name: String,
    pub origin: (SegmentId, Vector3<f64>),
    pub insertion: (SegmentId, Vector3<f64>),
    /// Length below which the tendon carries no force, meters.
    pub slack_length: f64,
    /// Spring stiffness, N/m.
    pub stiffness: f64,
}

/// Marker positions at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerFrame {
    /// Seconds from session start.
    pub t: f64,
    pub positions: Vec<Point3<f64>>,
}

/// A marker trajectory: shared names plus per-frame positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerTrajectorySet {
    pub marker_names: Vec<String>,
    pub frames: Vec<MarkerFrame>,
}

/// A joint-angle time series.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    pub times: Vec<f64>,
    pub poses: Vec<NeckPose>,
}

/// Rigid transform of one segment: world rotation and world position of
/// the segment origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentTransform {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl SegmentTransform {
    /// Apply to a local point.
    pub fn apply(&self, local: &Vector3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * local + self.translation)
    }
}

/// Tunable scalar parameters of the default model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Length of each vertebral link, meters.
    pub link_length: f64,
    /// Skull center height above C1, meters.
    pub skull_offset: f64,
    pub rom_pitch: f64,
    pub rom_roll: f64,
    pub rom_yaw: f64,
    /// Tendon spring stiffness, N/m.
    pub stiffness: f64,
    /// Slack length as a fraction of neutral length.
    pub slack_ratio: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            link_length: 0.02,
            skull_offset: 0.04,
            rom_pitch: 1.2,
            rom_roll: 0.9,
            rom_yaw: 1.4,
            stiffness: 500.0,
            slack_ratio: 0.98,
        }
    }
}

impl ModelConfig {
    /// Parse a `key = value` configuration file. Blank lines and `#`
    /// comments are ignored; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<ModelConfig> {
        let mut config = ModelConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
                line: Some(i + 1),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::Config {
                field: key.to_string(),
                message: format!("bad numeric value `{}`", value.trim()),
            })?;
            match key {
                "link_length" => config.link_length = value,
                "skull_offset" => config.skull_offset = value,
                "rom_pitch" => config.rom_pitch = value,
                "rom_roll" => config.rom_roll = value,
                "rom_yaw" => config.rom_yaw = value,
                "stiffness" => config.stiffness = value,
                "slack_ratio" => config.slack_ratio = value,
                other => {
                    return Err(Error::Config {
                        field: other.to_string(),
                        message: "unknown configuration key".into(),
                    })
                }
            }
        }
        Ok(config)
    }
}

/// The assembled model: chain geometry, markers, muscles, and cached
/// neutral-pose reference tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NeckModel {
    link_lengths: [f64; VERTEBRAL_JOINTS],
    skull_offset: f64,
    rom: RangeOfMotion,
    markers: Vec<Marker>,
    muscles: Vec<MusclePath>,
    /// `mirror_partner[i]` is the muscle whose geometry is the Z-mirror of
    /// muscle `i` (an involution; midline muscles map to themselves).
    mirror_partner: [usize; MUSCLE_COUNT],
    neutral_markers: Vec<Point3<f64>>,
    neutral_muscle_lengths: [f64; MUSCLE_COUNT],
}

/// One muscle-table row: name, origin segment + offset, insertion segment
/// + offset.
type MuscleRow = (&'static str, SegmentId, [f64; 3], SegmentId, [f64; 3]);

/// Muscle attachment table. Suprahyoid paths hang from the skull;
/// infrahyoid paths are anchored low and posterior on the thorax so that
/// deep flexion stretches them — that keeps flexed postures
/// distinguishable by force. All insertions sit at the hyoid level,
/// modelled on C4.
#[rustfmt::skip]
const MUSCLE_TABLE: [MuscleRow; MUSCLE_COUNT] = [
    ("digastric-ant",  SegmentId::Skull,  [ 0.060,  0.010,  0.020], SegmentId::Vertebra(3), [0.050, 0.010,  0.020]),
    ("digastric-post", SegmentId::Skull,  [-0.045,  0.015,  0.035], SegmentId::Vertebra(3), [0.050, 0.010,  0.015]),
    ("mylohyoid",      SegmentId::Skull,  [ 0.055,  0.000,  0.000], SegmentId::Vertebra(3), [0.050, 0.010,  0.000]),
    ("geniohyoid",     SegmentId::Skull,  [ 0.060,  0.010, -0.020], SegmentId::Vertebra(3), [0.050, 0.010, -0.020]),
    ("stylohyoid",     SegmentId::Skull,  [-0.045,  0.015, -0.035], SegmentId::Vertebra(3), [0.050, 0.010, -0.015]),
    ("sternohyoid",    SegmentId::Thorax, [-0.075, -0.005,  0.040], SegmentId::Vertebra(3), [0.050, 0.010,  0.015]),
    ("omohyoid",       SegmentId::Thorax, [-0.075, -0.005,  0.000], SegmentId::Vertebra(3), [0.050, 0.010,  0.000]),
    ("thyrohyoid",     SegmentId::Thorax, [-0.075, -0.005, -0.040], SegmentId::Vertebra(3), [0.050, 0.010, -0.015]),
];

/// Muscles attached to the skull (the suprahyoid group); these strictly
/// lengthen as the neck extends.
pub const SUPRAHYOID: [usize; 5] = [0, 1, 2, 3, 4];

/// Z-mirror partner per muscle, matching `MUSCLE_TABLE` order.
const MIRROR_PARTNER: [usize; MUSCLE_COUNT] = [3, 4, 2, 0, 1, 7, 6, 5];

#[rustfmt::skip]
const MARKER_TABLE: [(&str, SegmentId, [f64; 3]); MARKER_COUNT] = [
    ("RFHD", SegmentId::Skull,  [ 0.07,  0.10,  0.06]),
    ("LFHD", SegmentId::Skull,  [ 0.07,  0.10, -0.06]),
    ("RBHD", SegmentId::Skull,  [-0.07,  0.10,  0.06]),
    ("LBHD", SegmentId::Skull,  [-0.07,  0.10, -0.06]),
    ("SJN",  SegmentId::Thorax, [ 0.05, -0.02,  0.00]),
    ("RAC",  SegmentId::Thorax, [ 0.00,  0.00,  0.18]),
    ("LAC",  SegmentId::Thorax, [ 0.00,  0.00, -0.18]),
];

/// Build the default model, optionally adjusted by a [`ModelConfig`].
pub fn build_default_model(config: &ModelConfig) -> Result<NeckModel> {
    let positive = [
        ("link_length", config.link_length),
        ("skull_offset", config.skull_offset),
        ("rom_pitch", config.rom_pitch),
        ("rom_roll", config.rom_roll),
        ("rom_yaw", config.rom_yaw),
        ("stiffness", config.stiffness),
        ("slack_ratio", config.slack_ratio),
    ];
    for (field, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config {
                field: field.to_string(),
                message: format!("must be positive and finite, got {value}"),
            });
        }
    }
    if config.slack_ratio >= 1.0 {
        return Err(Error::Config {
            field: "slack_ratio".to_string(),
            message: format!("must be < 1 so tendons carry pretension, got {}", config.slack_ratio),
        });
    }

    let markers: Vec<Marker> = MARKER_TABLE
        .iter()
        .map(|(name, segment, offset)| Marker {
            name: name.to_string(),
            segment: *segment,
            offset: Vector3::from(*offset),
        })
        .collect();
    let muscles: Vec<MusclePath> = MUSCLE_TABLE
        .iter()
        .map(|(name, oseg, ooff, iseg, ioff)| MusclePath {
            name: name.to_string(),
            origin: (*oseg, Vector3::from(*ooff)),
            insertion: (*iseg, Vector3::from(*ioff)),
            slack_length: 0.0, // filled from neutral lengths below
            stiffness: config.stiffness,
        })
        .collect();

    let mut model = NeckModel {
        link_lengths: [config.link_length; VERTEBRAL_JOINTS],
        skull_offset: config.skull_offset,
        rom: RangeOfMotion {
            pitch: config.rom_pitch,
            roll: config.rom_roll,
            yaw: config.rom_yaw,
        },
        markers,
        muscles,
        mirror_partner: MIRROR_PARTNER,
        neutral_markers: Vec::new(),
        neutral_muscle_lengths: [0.0; MUSCLE_COUNT],
    };

    let neutral = fk_unchecked(&model, &NeckPose::NEUTRAL);
    model.neutral_markers = model
        .markers
        .iter()
        .map(|m| neutral[m.segment.chain_index()].apply(&m.offset))
        .collect();
    for (i, length) in muscle_lengths_from_transforms(&model, &neutral)
        .into_iter()
        .enumerate()
    {
        model.neutral_muscle_lengths[i] = length;
        model.muscles[i].slack_length = config.slack_ratio * length;
    }
    Ok(model)
}

impl NeckModel {
    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn muscles(&self) -> &[MusclePath] {
        &self.muscles
    }

    pub fn marker_names(&self) -> Vec<String> {
        self.markers.iter().map(|m| m.name.clone()).collect()
    }

    pub fn muscle_names(&self) -> Vec<String> {
        self.muscles.iter().map(|m| m.name.clone()).collect()
    }

    pub fn range_of_motion(&self) -> &RangeOfMotion {
        &self.rom
    }

    /// Marker positions at the neutral pose.
    pub fn neutral_markers(&self) -> &[Point3<f64>] {
        &self.neutral_markers
    }

    /// Muscle lengths at the neutral pose.
    pub fn neutral_muscle_lengths(&self) -> [f64; MUSCLE_COUNT] {
        self.neutral_muscle_lengths
    }

    /// The Z-mirror partner of each muscle.
    pub fn mirror_partner(&self) -> [usize; MUSCLE_COUNT] {
        self.mirror_partner
    }

    pub fn link_lengths(&self) -> [f64; VERTEBRAL_JOINTS] {
        self.link_lengths
    }

    pub fn skull_offset(&self) -> f64 {
        self.skull_offset
    }
}

/// Forward kinematics without the range-of-motion gate; used internally by
/// the solver, whose probe points may sit just outside the box.
pub(crate) fn fk_unchecked(model: &NeckModel, pose: &NeckPose) -> Vec<SegmentTransform> {
    let step = Rotation3::from_axis_angle(&Vector3::y_axis(), pose.yaw / VERTEBRAL_JOINTS as f64)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), pose.roll / VERTEBRAL_JOINTS as f64)
        * Rotation3::from_axis_angle(&Vector3::z_axis(), pose.pitch / VERTEBRAL_JOINTS as f64);

    let mut transforms = Vec::with_capacity(VERTEBRAL_JOINTS + 2);
    transforms.push(SegmentTransform {
        rotation: Rotation3::identity(),
        translation: Vector3::zeros(),
    });
    let mut rotation = Rotation3::identity();
    let mut position = Vector3::zeros();
    for link in model.link_lengths {
        rotation *= step;
        position += rotation * Vector3::new(0.0, link, 0.0);
        transforms.push(SegmentTransform {
            rotation,
            translation: position,
        });
    }
    transforms.push(SegmentTransform {
        rotation,
        translation: position + rotation * Vector3::new(0.0, model.skull_offset, 0.0),
    });
    transforms
}

/// Rigid transforms for all segments: index 0 = thorax (identity), 1..=7 =
/// C7..C1, 8 = skull. Each vertebral joint rotates by 1/7 of the total
/// pose (intrinsic yaw·roll·pitch) and then translates along its local +Y.
pub fn forward_kinematics(model: &NeckModel, pose: &NeckPose) -> Result<Vec<SegmentTransform>> {
    model.rom.check(pose)?;
    Ok(fk_unchecked(model, pose))
}

/// World positions of the seven markers at a pose, in model marker order.
pub fn marker_positions(model: &NeckModel, pose: &NeckPose) -> Result<Vec<Point3<f64>>> {
    let transforms = forward_kinematics(model, pose)?;
    Ok(model
        .markers
        .iter()
        .map(|m| transforms[m.segment.chain_index()].apply(&m.offset))
        .collect())
}

fn muscle_lengths_from_transforms(
    model: &NeckModel,
    transforms: &[SegmentTransform],
) -> [f64; MUSCLE_COUNT] {
    let mut lengths = [0.0; MUSCLE_COUNT];
    for (slot, muscle) in lengths.iter_mut().zip(&model.muscles) {
        let origin = transforms[muscle.origin.0.chain_index()].apply(&muscle.origin.1);
        let insertion = transforms[muscle.insertion.0.chain_index()].apply(&muscle.insertion.1);
        *slot = (origin - insertion).norm();
    }
    lengths
}

/// Straight-line muscle lengths at a pose, in model muscle order.
pub fn muscle_lengths(model: &NeckModel, pose: &NeckPose) -> Result<[f64; MUSCLE_COUNT]> {
    let transforms = forward_kinematics(model, pose)?;
    Ok(muscle_lengths_from_transforms(model, &transforms))
}

/// Estimate pitch and roll from a static accelerometer reading (g units).
///
/// With the sensor band's Y axis along gravity at neutral, a static
/// reading is the gravity direction pulled back through the band
/// orientation, giving `pitch = atan2(a_x, sqrt(a_y² + a_z²))` and
/// `roll = atan2(−a_z, a_y)`. Pitch takes the principal value (|pitch| ≤
/// π/2), which covers the full range of motion. Yaw is unobservable: it
/// rotates about gravity itself.
pub fn tilt_from_accel(accel: [f64; 3]) -> Result<(f64, f64)> {
    let [ax, ay, az] = accel;
    let magnitude = (ax * ax + ay * ay + az * az).sqrt();
    if !(magnitude > 0.5) {
        return Err(Error::FreeFall { magnitude });
    }
    let pitch = ax.atan2((ay * ay + az * az).sqrt());
    let roll = (-az).atan2(ay);
    Ok((pitch, roll))
}
