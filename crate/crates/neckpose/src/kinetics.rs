//! Passive tendon-force computation: map joint trajectories to per-muscle
//! force time series through a linear spring beyond slack length.

use crate::error::Error;
use crate::model::{muscle_lengths, JointTrajectory, MusclePath, NeckModel, NeckPose, MUSCLE_COUNT};
use crate::Result;

/// Per-muscle force columns over time, Newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct MuscleForceSeries {
    /// Seconds per row.
    pub times: Vec<f64>,
    /// Column names, matching the model's muscle order.
    pub muscle_names: Vec<String>,
    /// One row per time, one column per muscle.
    pub rows: Vec<Vec<f64>>,
}

/// Passive tendon force at a given path length: a linear spring engaged
/// beyond slack length, slack otherwise.
pub fn tendon_force(muscle: &MusclePath, length: f64) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain {
            message: format!(
                "muscle `{}` length must be positive and finite, got {length}",
                muscle.name
            ),
        });
    }
    Ok(muscle.stiffness * (length - muscle.slack_length).max(0.0))
}

/// Forces of all muscles at one pose.
pub fn muscle_forces(model: &NeckModel, pose: &NeckPose) -> Result<[f64; MUSCLE_COUNT]> {
    let lengths = muscle_lengths(model, pose)?;
    let mut forces = [0.0; MUSCLE_COUNT];
    for (force, (muscle, length)) in forces.iter_mut().zip(model.muscles().iter().zip(lengths)) {
        *force = tendon_force(muscle, length)?;
    }
    Ok(forces)
}

/// Evaluate the force of every muscle at every frame of a trajectory.
/// Output timestamps equal the input timestamps; a pose outside the range
/// of motion fails with the offending frame index attached.
pub fn compute_force_series(
    model: &NeckModel,
    trajectory: &JointTrajectory,
) -> Result<MuscleForceSeries> {
    if trajectory.times.len() != trajectory.poses.len() {
        return Err(Error::Shape {
            expected: trajectory.times.len(),
            got: trajectory.poses.len(),
        });
    }
    let rows = trajectory
        .poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            muscle_forces(model, pose)
                .map(Vec::from)
                .map_err(|e| e.at_frame(i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MuscleForceSeries {
        times: trajectory.times.clone(),
        muscle_names: model.muscle_names(),
        rows,
    })
}
