//! Damped Gauss–Newton inverse kinematics: recover neck poses from marker
//! trajectories by weighted least squares.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::Error;
use crate::model::{
    fk_unchecked, JointTrajectory, MarkerFrame, MarkerTrajectorySet, NeckModel, NeckPose,
};
use crate::Result;

/// Central-difference step for the numerical Jacobian, radians.
const JACOBIAN_STEP: f64 = 1e-6;

/// Maximum step halvings per Gauss–Newton iteration.
const MAX_HALVINGS: usize = 20;

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IkSettings {
    /// Per-marker weight overrides; markers not listed weigh 1.0.
    pub weights: BTreeMap<String, f64>,
    /// Convergence tolerance on the squared-error improvement, m².
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Levenberg damping added to the normal equations.
    pub damping: f64,
}

impl Default for IkSettings {
    fn default() -> Self {
        IkSettings {
            weights: BTreeMap::new(),
            tolerance: 1e-10,
            max_iterations: 100,
            damping: 1e-6,
        }
    }
}

impl IkSettings {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config {
                field: "tolerance".into(),
                message: format!("must be positive, got {}", self.tolerance),
            });
        }
        if self.max_iterations < 1 {
            return Err(Error::Config {
                field: "max_iterations".into(),
                message: "must be at least 1".into(),
            });
        }
        if !(self.damping > 0.0) {
            return Err(Error::Config {
                field: "damping".into(),
                message: format!("must be positive, got {}", self.damping),
            });
        }
        for (name, w) in &self.weights {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::Config {
                    field: format!("weights.{name}"),
                    message: format!("must be finite and non-negative, got {w}"),
                });
            }
        }
        Ok(())
    }

    fn weight_for(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(1.0)
    }
}

/// Outcome of one frame solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkFrameResult {
    pub pose: NeckPose,
    /// Weighted root-mean-square marker error, meters.
    pub rms_error: f64,
    pub iterations: usize,
    /// True when the squared-error improvement dropped below tolerance.
    pub converged: bool,
}

/// A solved trajectory with per-frame diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IkTrajectoryResult {
    pub trajectory: JointTrajectory,
    pub frames: Vec<IkFrameResult>,
}

impl IkTrajectoryResult {
    /// Fraction of frames that converged.
    pub fn convergence_ratio(&self) -> f64 {
        if self.frames.is_empty() {
            return 1.0;
        }
        self.frames.iter().filter(|f| f.converged).count() as f64 / self.frames.len() as f64
    }

    /// Largest per-frame rms marker error, meters.
    pub fn max_rms_error(&self) -> f64 {
        self.frames.iter().map(|f| f.rms_error).fold(0.0, f64::max)
    }
}

/// Solve one frame: minimize `Σᵢ wᵢ‖targetᵢ − modelᵢ(q)‖²` over the pose
/// box by damped Gauss–Newton with a central-difference Jacobian.
///
/// `marker_names` gives the marker name for each position in `target`;
/// every name must exist in the model.
pub fn solve_frame(
    model: &NeckModel,
    marker_names: &[String],
    target: &MarkerFrame,
    settings: &IkSettings,
    warm_start: &NeckPose,
) -> Result<IkFrameResult> {
    settings.validate()?;
    if marker_names.len() != target.positions.len() {
        return Err(Error::Shape {
            expected: marker_names.len(),
            got: target.positions.len(),
        });
    }
    let model_names = model.marker_names();
    let indices: Vec<usize> = marker_names
        .iter()
        .map(|name| {
            model_names
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::Config {
                    field: "markers".into(),
                    message: format!("target marker `{name}` not in model"),
                })
        })
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = marker_names
        .iter()
        .map(|name| settings.weight_for(name))
        .collect();
    let total_weight: f64 = weights.iter().sum();
    if !(total_weight > 0.0) {
        return Err(Error::Config {
            field: "weights".into(),
            message: "no target marker has positive weight".into(),
        });
    }
    model.range_of_motion().check(warm_start)?;

    let rom = *model.range_of_motion();
    let limits = rom.limits();
    let clamp = |q: [f64; 3]| {
        [
            q[0].clamp(-limits[0], limits[0]),
            q[1].clamp(-limits[1], limits[1]),
            q[2].clamp(-limits[2], limits[2]),
        ]
    };
    let targets: Vec<Vector3<f64>> = target.positions.iter().map(|p| p.coords).collect();

    let positions_at = |q: &[f64; 3]| -> Vec<Point3<f64>> {
        let transforms = fk_unchecked(model, &NeckPose::from_array(*q));
        indices
            .iter()
            .map(|&i| {
                let marker = &model.markers()[i];
                transforms[marker.segment.chain_index()].apply(&marker.offset)
            })
            .collect()
    };
    let error_at = |q: &[f64; 3]| -> f64 {
        positions_at(q)
            .iter()
            .zip(&targets)
            .zip(&weights)
            .map(|((p, t), w)| w * (p.coords - t).norm_squared())
            .sum()
    };

    let mut q = warm_start.to_array();
    let mut err = error_at(&q);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iterations {
        iterations += 1;

        // Columns of the weighted Jacobian: marker velocity per pose axis.
        let mut columns: [Vec<Vector3<f64>>; 3] = Default::default();
        for d in 0..3 {
            let mut plus = q;
            plus[d] += JACOBIAN_STEP;
            let mut minus = q;
            minus[d] -= JACOBIAN_STEP;
            columns[d] = positions_at(&plus)
                .iter()
                .zip(positions_at(&minus).iter())
                .map(|(p, m)| (p.coords - m.coords) / (2.0 * JACOBIAN_STEP))
                .collect();
        }

        // Normal equations (JᵀWJ + λI) δ = JᵀW r with r = target − model(q).
        let current = positions_at(&q);
        let mut a = Matrix3::zeros();
        let mut b = Vector3::zeros();
        for (i, w) in weights.iter().enumerate() {
            let r = targets[i] - current[i].coords;
            for d in 0..3 {
                b[d] += w * columns[d][i].dot(&r);
                for e in d..3 {
                    a[(d, e)] += w * columns[d][i].dot(&columns[e][i]);
                }
            }
        }
        for d in 0..3 {
            for e in 0..d {
                a[(d, e)] = a[(e, d)];
            }
            a[(d, d)] += settings.damping;
        }
        let delta = a
            .lu()
            .solve(&b)
            .unwrap_or_else(Vector3::zeros); // damping keeps A invertible in practice

        // Accept the first (possibly halved) step that does not increase
        // the error; give up after MAX_HALVINGS halvings.
        let mut step = delta;
        let mut accepted: Option<([f64; 3], f64)> = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = clamp([q[0] + step[0], q[1] + step[1], q[2] + step[2]]);
            let trial_err = error_at(&trial);
            if trial_err <= err {
                accepted = Some((trial, trial_err));
                break;
            }
            step *= 0.5;
        }
        let Some((next_q, next_err)) = accepted else {
            converged = true; // stuck: no descent direction left
            break;
        };
        let improvement = err - next_err;
        q = next_q;
        err = next_err;
        if improvement < settings.tolerance {
            converged = true;
            break;
        }
    }

    Ok(IkFrameResult {
        pose: NeckPose::from_array(q),
        rms_error: (err / total_weight).sqrt(),
        iterations,
        converged,
    })
}

/// Solve every frame of a trajectory in time order. By default each frame
/// warm-starts from the previous solution; `cold_start` makes every frame
/// start from neutral instead.
pub fn solve_trajectory(
    model: &NeckModel,
    markers: &MarkerTrajectorySet,
    settings: &IkSettings,
    cold_start: bool,
) -> Result<IkTrajectoryResult> {
    if markers.frames.is_empty() {
        return Err(Error::InvalidArgument {
            name: "markers",
            message: "trajectory has no frames".into(),
        });
    }
    let mut poses = Vec::with_capacity(markers.frames.len());
    let mut times = Vec::with_capacity(markers.frames.len());
    let mut frames = Vec::with_capacity(markers.frames.len());
    let mut warm = NeckPose::NEUTRAL;
    for (i, frame) in markers.frames.iter().enumerate() {
        let start = if cold_start { NeckPose::NEUTRAL } else { warm };
        let result = solve_frame(model, &markers.marker_names, frame, settings, &start)
            .map_err(|e| e.at_frame(i))?;
        warm = result.pose;
        times.push(frame.t);
        poses.push(result.pose);
        frames.push(result);
    }
    Ok(IkTrajectoryResult {
        trajectory: JointTrajectory { times, poses },
        frames,
    })
}

/// Plain-text per-frame diagnostics (rms, iterations, convergence) for the
/// sidecar report written next to solver output files.
pub fn write_ik_report(result: &IkTrajectoryResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "frames {}  converged {:.4}  max_rms {:.3e}\n",
        result.frames.len(),
        result.convergence_ratio(),
        result.max_rms_error(),
    ));
    out.push_str("frame\ttime\trms_error\titerations\tconverged\n");
    for (i, (t, f)) in result
        .trajectory
        .times
        .iter()
        .zip(&result.frames)
        .enumerate()
    {
        out.push_str(&format!(
            "{i}\t{t:.3}\t{:.6e}\t{}\t{}\n",
            f.rms_error, f.iterations, f.converged
        ));
    }
    out
}
