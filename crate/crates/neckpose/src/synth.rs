//! Synthetic session generator: labeled IMU recordings plus ground-truth
//! pose trajectories for the nine neck postures.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::ingest::{ImuSample, ImuSeries};
use crate::model::{JointTrajectory, NeckPose, RangeOfMotion};
use crate::types::{PostureLabel, CLASS_COUNT};
use crate::Result;

/// Headband roll induced per radian of yaw. Pure axial rotation is
/// invisible to a gravity-only accelerometer; rotated postures are modeled
/// with a small coupled band tilt so they stay observable.
pub const BAND_ROLL_COUPLING: f64 = 0.25;

/// Session start epoch for generated timestamps: 2019-07-01T00:00:00Z.
pub const BASE_EPOCH_MS: i64 = 1_561_939_200_000;

/// Canonical (pitch°, yaw°) per posture; roll follows the band-coupling rule.
const POSTURE_DEGREES: [(f64, f64); CLASS_COUNT] = [
    (50.0, 0.0),    // NU
    (-50.0, 0.0),   // ND
    (0.0, -60.0),   // NR
    (0.0, 60.0),    // NL
    (35.0, -60.0),  // NRU
    (-35.0, -60.0), // NRD
    (35.0, 60.0),   // NLU
    (-35.0, 60.0),  // NLD
    (0.0, 0.0),     // NM
];

/// The canonical pose for each posture label.
#[derive(Debug, Clone, PartialEq)]
pub struct PostureTable {
    poses: [NeckPose; CLASS_COUNT],
}

impl Default for PostureTable {
    fn default() -> Self {
        let poses = POSTURE_DEGREES.map(|(pitch_deg, yaw_deg)| {
            let pitch = pitch_deg.to_radians();
            let yaw = yaw_deg.to_radians();
            NeckPose::new(pitch, BAND_ROLL_COUPLING * yaw, yaw)
        });
        PostureTable { poses }
    }
}

impl PostureTable {
    pub fn pose(&self, label: PostureLabel) -> NeckPose {
        self.poses[label.index()]
    }
}

/// Canonical pose of a posture under the default table.
pub fn posture_pose(label: PostureLabel) -> NeckPose {
    PostureTable::default().pose(label)
}

/// Noise-free accelerometer reading of the headband at a pose, g units:
/// the gravity direction expressed in the sensor frame
/// `R = Ry(yaw)·Rz(pitch)·Rx(roll)`, so `reading = Rᵀ·(0, 1, 0)`.
/// Yaw drops out exactly — only the coupled band roll keeps rotated
/// postures distinguishable.
pub fn accel_reading(pose: &NeckPose) -> [f64; 3] {
    let (sp, cp) = pose.pitch.sin_cos();
    let (sr, cr) = pose.roll.sin_cos();
    [sp, cp * cr, -cp * sr]
}

/// Noise magnitudes and the generator seed for a synthetic session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Accelerometer noise standard deviation, g.
    pub accel_std: f64,
    /// Posture jitter standard deviation per axis, radians.
    pub jitter_std: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            accel_std: 0.02,
            jitter_std: 0.02,
            seed: 42,
        }
    }
}

/// A generated session: the noisy IMU series plus the exact poses and
/// labels behind every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSession {
    pub imu: ImuSeries,
    /// True (jittered) pose per sample.
    pub truth: JointTrajectory,
    /// Posture label per sample.
    pub labels: Vec<PostureLabel>,
}

/// The nine postures for 120 s each, in canonical label order.
pub fn default_schedule() -> Vec<(PostureLabel, f64)> {
    PostureLabel::ALL.into_iter().map(|l| (l, 120.0)).collect()
}

/// Generate a session: per sample, the posture pose plus Gaussian jitter
/// (clamped to the default range of motion) read through the gravity model
/// plus accelerometer noise. Each schedule segment draws from its own
/// generator stream, so output is deterministic regardless of evaluation
/// order.
pub fn simulate_session(
    schedule: &[(PostureLabel, f64)],
    noise: &NoiseSpec,
    rate_hz: f64,
) -> Result<SyntheticSession> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument {
            name: "schedule",
            message: "schedule has no entries".into(),
        });
    }
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "rate_hz",
            message: format!("must be positive and finite, got {rate_hz}"),
        });
    }
    for (name, std) in [("accel_std", noise.accel_std), ("jitter_std", noise.jitter_std)] {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::InvalidArgument {
                name,
                message: format!("must be non-negative and finite, got {std}"),
            });
        }
    }
    let jitter = Normal::new(0.0, noise.jitter_std).expect("validated std");
    let accel_noise = Normal::new(0.0, noise.accel_std).expect("validated std");
    let table = PostureTable::default();
    let rom = RangeOfMotion::default();

    let mut samples = Vec::new();
    let mut poses = Vec::new();
    let mut times = Vec::new();
    let mut labels = Vec::new();
    let mut sample_index: u64 = 0;
    for (segment, &(label, duration)) in schedule.iter().enumerate() {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "schedule",
                message: format!("segment {segment} duration must be positive, got {duration}"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(segment as u64);
        let count = (duration * rate_hz).round() as u64;
        let base = table.pose(label);
        for _ in 0..count {
            let elapsed = sample_index as f64 / rate_hz;
            let pose = rom.clamp(&NeckPose::new(
                base.pitch + jitter.sample(&mut rng),
                base.roll + jitter.sample(&mut rng),
                base.yaw + jitter.sample(&mut rng),
            ));
            let clean = accel_reading(&pose);
            let reading = [
                clean[0] + accel_noise.sample(&mut rng),
                clean[1] + accel_noise.sample(&mut rng),
                clean[2] + accel_noise.sample(&mut rng),
            ];
            samples.push(ImuSample {
                epoch_ms: BASE_EPOCH_MS + (elapsed * 1000.0).round() as i64,
                elapsed_s: elapsed,
                accel: reading.map(Some),
            });
            times.push(elapsed);
            poses.push(pose);
            labels.push(label);
            sample_index += 1;
        }
    }
    Ok(SyntheticSession {
        imu: ImuSeries {
            samples,
            rate_hz,
        },
        truth: JointTrajectory { times, poses },
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tilt_from_accel;

    #[test]
    fn neutral_posture_is_the_zero_pose() {
        assert_eq!(posture_pose(PostureLabel::Nm), NeckPose::NEUTRAL);
    }

    #[test]
    fn left_right_postures_mirror() {
        let table = PostureTable::default();
        for (l, r) in [
            (PostureLabel::Nl, PostureLabel::Nr),
            (PostureLabel::Nlu, PostureLabel::Nru),
            (PostureLabel::Nld, PostureLabel::Nrd),
        ] {
            let left = table.pose(l);
            let right = table.pose(r);
            assert_eq!(left.pitch, right.pitch);
            assert_eq!(left.yaw, -right.yaw);
            assert_eq!(left.roll, -right.roll);
        }
    }

    #[test]
    fn table_matches_the_documented_angles() {
        let nu = posture_pose(PostureLabel::Nu);
        assert!((nu.pitch - 50f64.to_radians()).abs() < 1e-15);
        assert_eq!(nu.yaw, 0.0);
        assert_eq!(nu.roll, 0.0);
        let nr = posture_pose(PostureLabel::Nr);
        assert!((nr.yaw + 60f64.to_radians()).abs() < 1e-15);
        assert!((nr.roll - BAND_ROLL_COUPLING * nr.yaw).abs() < 1e-15);
    }

    #[test]
    fn accel_reading_known_orientations() {
        let neutral = accel_reading(&NeckPose::NEUTRAL);
        assert_eq!(neutral, [0.0, 1.0, 0.0]);
        let forward = accel_reading(&NeckPose::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        assert!((forward[0] - 1.0).abs() < 1e-15);
        assert!(forward[1].abs() < 1e-15);
        assert!(forward[2].abs() < 1e-15);
    }

    #[test]
    fn accel_reading_is_unit_norm_and_yaw_blind() {
        let mut pose = NeckPose::new(0.4, -0.2, 0.0);
        let base = accel_reading(&pose);
        for yaw in [-1.4, -0.3, 0.7, 1.4] {
            pose.yaw = yaw;
            let r = accel_reading(&pose);
            assert_eq!(r, base);
            let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tilt_formulas_invert_the_reading() {
        let table = PostureTable::default();
        for label in PostureLabel::ALL {
            let pose = table.pose(label);
            let (pitch, roll) = tilt_from_accel(accel_reading(&pose)).unwrap();
            assert!((pitch - pose.pitch).abs() < 1e-12, "{label}");
            assert!((roll - pose.roll).abs() < 1e-12, "{label}");
        }
    }

    #[test]
    fn class_centroids_stay_well_separated() {
        let table = PostureTable::default();
        let readings: Vec<[f64; 3]> = PostureLabel::ALL
            .iter()
            .map(|&l| accel_reading(&table.pose(l)))
            .collect();
        let mut min_dist = f64::INFINITY;
        for i in 0..readings.len() {
            for j in (i + 1)..readings.len() {
                let d: f64 = (0..3)
                    .map(|k| (readings[i][k] - readings[j][k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
        assert!(min_dist > 0.2, "minimum centroid distance {min_dist}");
    }

    #[test]
    fn mirror_postures_give_mirror_readings() {
        let table = PostureTable::default();
        for (l, r) in [
            (PostureLabel::Nl, PostureLabel::Nr),
            (PostureLabel::Nlu, PostureLabel::Nru),
            (PostureLabel::Nld, PostureLabel::Nrd),
        ] {
            let a = accel_reading(&table.pose(l));
            let b = accel_reading(&table.pose(r));
            assert!((a[0] - b[0]).abs() < 1e-15);
            assert!((a[1] - b[1]).abs() < 1e-15);
            assert!((a[2] + b[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn default_session_has_the_documented_sample_count() {
        let session = simulate_session(&default_schedule(), &NoiseSpec::default(), 100.0).unwrap();
        assert_eq!(session.imu.samples.len(), 108_000);
        assert_eq!(session.truth.poses.len(), 108_000);
        assert_eq!(session.labels.len(), 108_000);
        assert_eq!(session.imu.samples[0].elapsed_s, 0.0);
        let last = session.imu.samples.last().unwrap();
        assert!((last.elapsed_s - 1079.99).abs() < 1e-9);
        assert_eq!(session.imu.samples[0].epoch_ms, BASE_EPOCH_MS);
    }

    #[test]
    fn zero_noise_neutral_schedule_is_constant() {
        let noise = NoiseSpec {
            accel_std: 0.0,
            jitter_std: 0.0,
            seed: 1,
        };
        let session = simulate_session(&[(PostureLabel::Nm, 2.0)], &noise, 10.0).unwrap();
        assert_eq!(session.imu.samples.len(), 20);
        for sample in &session.imu.samples {
            assert_eq!(sample.accel, [Some(0.0), Some(1.0), Some(0.0)]);
        }
        for pose in &session.truth.poses {
            assert_eq!(*pose, NeckPose::NEUTRAL);
        }
    }

    #[test]
    fn same_seed_reproduces_the_session() {
        let a = simulate_session(&default_schedule()[..2], &NoiseSpec::default(), 25.0).unwrap();
        let b = simulate_session(&default_schedule()[..2], &NoiseSpec::default(), 25.0).unwrap();
        assert_eq!(a, b);
        let different = simulate_session(
            &default_schedule()[..2],
            &NoiseSpec {
                seed: 43,
                ..NoiseSpec::default()
            },
            25.0,
        )
        .unwrap();
        assert_ne!(a, different);
    }

    #[test]
    fn empty_schedule_is_rejected() {
        assert!(matches!(
            simulate_session(&[], &NoiseSpec::default(), 100.0),
            Err(Error::InvalidArgument {
                name: "schedule",
                ..
            })
        ));
    }

    #[test]
    fn truth_poses_stay_within_range_of_motion() {
        let rom = RangeOfMotion::default();
        let session = simulate_session(
            &default_schedule(),
            &NoiseSpec {
                jitter_std: 0.5, // exaggerated jitter to exercise the clamp
                ..NoiseSpec::default()
            },
            5.0,
        )
        .unwrap();
        for pose in &session.truth.poses {
            assert!(rom.check(pose).is_ok());
        }
    }
}
