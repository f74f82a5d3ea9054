#![allow(dead_code)]
//! Independent oracles: plain-array matrix math, scalar geometry, and
//! exhaustive searches that share no code with the library internals.

use nalgebra::Point3;
use neckpose::model::{marker_positions, NeckModel, NeckPose};
use neckpose::types::{PostureLabel, CLASS_COUNT};

pub type Mat4 = [[f64; 4]; 4];

pub fn identity() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut sum = 0.0;
            for (k, b_row) in b.iter().enumerate() {
                sum += a[i][k] * b_row[j];
            }
            out[i][j] = sum;
        }
    }
    out
}

pub fn rot_x(t: f64) -> Mat4 {
    let (s, c) = t.sin_cos();
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s, 0.0],
        [0.0, s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn rot_y(t: f64) -> Mat4 {
    let (s, c) = t.sin_cos();
    [
        [c, 0.0, s, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-s, 0.0, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn rot_z(t: f64) -> Mat4 {
    let (s, c) = t.sin_cos();
    [
        [c, -s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn translation(x: f64, y: f64, z: f64) -> Mat4 {
    let mut m = identity();
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

pub fn apply_point(m: &Mat4, p: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
    }
    out
}

/// Segment transforms re-derived with homogeneous 4×4 matrices: per joint,
/// rotate by one seventh of the pose (intrinsic yaw·roll·pitch) and
/// translate along the local +Y link; the skull adds a final offset.
pub fn oracle_segment_transforms(model: &NeckModel, pose: &NeckPose) -> Vec<Mat4> {
    let joints = model.link_lengths().len() as f64;
    let step = mat_mul(
        &rot_y(pose.yaw / joints),
        &mat_mul(&rot_x(pose.roll / joints), &rot_z(pose.pitch / joints)),
    );
    let mut transforms = vec![identity()];
    let mut current = identity();
    for link in model.link_lengths() {
        current = mat_mul(&current, &mat_mul(&step, &translation(0.0, link, 0.0)));
        transforms.push(current);
    }
    transforms.push(mat_mul(
        &current,
        &translation(0.0, model.skull_offset(), 0.0),
    ));
    transforms
}

pub fn oracle_marker_positions(model: &NeckModel, pose: &NeckPose) -> Vec<[f64; 3]> {
    let transforms = oracle_segment_transforms(model, pose);
    model
        .markers()
        .iter()
        .map(|m| {
            apply_point(
                &transforms[m.segment.chain_index()],
                [m.offset.x, m.offset.y, m.offset.z],
            )
        })
        .collect()
}

pub fn oracle_muscle_lengths(model: &NeckModel, pose: &NeckPose) -> Vec<f64> {
    let transforms = oracle_segment_transforms(model, pose);
    model
        .muscles()
        .iter()
        .map(|muscle| {
            let o = apply_point(
                &transforms[muscle.origin.0.chain_index()],
                [muscle.origin.1.x, muscle.origin.1.y, muscle.origin.1.z],
            );
            let i = apply_point(
                &transforms[muscle.insertion.0.chain_index()],
                [muscle.insertion.1.x, muscle.insertion.1.y, muscle.insertion.1.z],
            );
            let (dx, dy, dz) = (o[0] - i[0], o[1] - i[1], o[2] - i[2]);
            (dx * dx + dy * dy + dz * dz).sqrt()
        })
        .collect()
}

/// Per-muscle spring forces from scalar distance + spring evaluation.
pub fn oracle_muscle_forces(model: &NeckModel, pose: &NeckPose) -> Vec<f64> {
    oracle_muscle_lengths(model, pose)
        .into_iter()
        .zip(model.muscles())
        .map(|(length, muscle)| {
            let stretch = length - muscle.slack_length;
            if stretch > 0.0 {
                muscle.stiffness * stretch
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Exhaustive split search: every (feature, midpoint) candidate evaluated
/// by direct predicate partition, best tracked with the documented tie
/// rules (lowest feature index, then lowest threshold).
pub fn oracle_best_split(
    features: &[Vec<f64>],
    labels: &[PostureLabel],
    subset: &[usize],
) -> Option<OracleSplit> {
    let n = features.len();
    if n < 2 {
        return None;
    }
    let gini = |counts: &[usize; CLASS_COUNT], total: usize| -> f64 {
        let t = total as f64;
        let mut sum_sq = 0.0;
        for &c in counts {
            let p = c as f64 / t;
            sum_sq += p * p;
        }
        1.0 - sum_sq
    };
    let mut parent = [0usize; CLASS_COUNT];
    for label in labels {
        parent[label.index()] += 1;
    }
    let parent_gini = gini(&parent, n);
    let mut ordered = subset.to_vec();
    ordered.sort_unstable();
    ordered.dedup();
    let mut best: Option<OracleSplit> = None;
    for &feature in &ordered {
        let mut values: Vec<f64> = features.iter().map(|row| row[feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            if !(pair[0] < threshold && threshold < pair[1]) {
                continue;
            }
            let mut left = [0usize; CLASS_COUNT];
            let mut right = [0usize; CLASS_COUNT];
            let mut n_left = 0usize;
            for (row, label) in features.iter().zip(labels) {
                if row[feature] < threshold {
                    left[label.index()] += 1;
                    n_left += 1;
                } else {
                    right[label.index()] += 1;
                }
            }
            let n_right = n - n_left;
            if n_left == 0 || n_right == 0 {
                continue;
            }
            let decrease = parent_gini
                - (n_left as f64 / n as f64) * gini(&left, n_left)
                - (n_right as f64 / n as f64) * gini(&right, n_right);
            if decrease > 0.0 && best.is_none_or(|b| decrease > b.decrease) {
                best = Some(OracleSplit {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

/// Derivative-free inverse kinematics: coarse grid over the pose box, then
/// coordinate descent with halving steps. Shares only forward kinematics
/// with the solver under test.
pub fn oracle_solve_pose(model: &NeckModel, target: &[Point3<f64>]) -> NeckPose {
    let limits = model.range_of_motion().limits();
    let error = |q: [f64; 3]| -> f64 {
        marker_positions(model, &NeckPose::from_array(q))
            .expect("grid stays inside the range of motion")
            .iter()
            .zip(target)
            .map(|(p, t)| (p.coords - t.coords).norm_squared())
            .sum()
    };

    let steps = [13usize, 9, 13];
    let mut best_q = [0.0; 3];
    let mut best_err = f64::INFINITY;
    for i in 0..steps[0] {
        for j in 0..steps[1] {
            for k in 0..steps[2] {
                let frac = |idx: usize, count: usize, limit: f64| {
                    -limit + 2.0 * limit * idx as f64 / (count - 1) as f64
                };
                let q = [
                    frac(i, steps[0], limits[0]),
                    frac(j, steps[1], limits[1]),
                    frac(k, steps[2], limits[2]),
                ];
                let e = error(q);
                if e < best_err {
                    best_err = e;
                    best_q = q;
                }
            }
        }
    }

    let mut step = [
        2.0 * limits[0] / (steps[0] - 1) as f64,
        2.0 * limits[1] / (steps[1] - 1) as f64,
        2.0 * limits[2] / (steps[2] - 1) as f64,
    ];
    while step.iter().any(|s| *s > 1e-8) {
        let mut improved = false;
        for axis in 0..3 {
            for direction in [-1.0, 1.0] {
                let mut q = best_q;
                q[axis] = (q[axis] + direction * step[axis]).clamp(-limits[axis], limits[axis]);
                let e = error(q);
                if e < best_err {
                    best_err = e;
                    best_q = q;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    NeckPose::from_array(best_q)
}

/// Scalar Hampel filter: centered window clamped at the edges, strict
/// threshold on the scaled median absolute deviation.
pub fn oracle_hampel(values: &[f64], window: usize, k: f64) -> Vec<f64> {
    let n = values.len();
    let half = window / 2;
    let median = |xs: &mut Vec<f64>| -> f64 {
        xs.sort_by(f64::total_cmp);
        let m = xs.len();
        if m % 2 == 1 {
            xs[m / 2]
        } else {
            (xs[m / 2 - 1] + xs[m / 2]) / 2.0
        }
    };
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let mut window_values: Vec<f64> = values[lo..hi].to_vec();
            let med = median(&mut window_values);
            let mut deviations: Vec<f64> = values[lo..hi].iter().map(|v| (v - med).abs()).collect();
            let mad = median(&mut deviations);
            if (values[i] - med).abs() > k * 1.4826 * mad {
                med
            } else {
                values[i]
            }
        })
        .collect()
}
