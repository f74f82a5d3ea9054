//! Neck-posture classification toolchain.
//!
//! The crate covers the full path from raw accelerometer logs to a trained
//! classifier:
//!
//! * [`ingest`] — IMU CSV parsing, gap interpolation, Hampel outlier removal,
//!   1 Hz aggregation, schedule labelling, and feature normalization.
//! * [`model`] — a simplified cervical chain (thorax, C7..C1, skull) with
//!   seven motion-capture markers and eight hyoid muscle paths.
//! * [`sim_io`] — TRC marker files and MOT/STO column files.
//! * [`ik`] — damped Gauss–Newton inverse kinematics over the chain.
//! * [`kinetics`] — passive spring-tendon forces along the muscle paths.
//! * [`forest`] — a from-scratch random forest (CART + Gini), with a
//!   deterministic text serialization.
//! * [`synth`] — synthetic posture sessions for the nine canonical classes.
//! * [`pipeline`] — the end-to-end run: ingest → features → split → train →
//!   evaluate → report.

// Validation guards are written `!(x > 0.0)` on purpose: NaN must fail
// them, which the suggested `x <= 0.0` rewrite would not do.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forest;
pub mod ik;
pub mod ingest;
pub mod kinetics;
pub mod model;
pub mod pipeline;
pub mod sim_io;
pub mod synth;
pub mod types;

pub use error::Error;
pub use types::PostureLabel;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
