//! One error type for the whole crate.

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong between a raw CSV and a trained forest.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem in an input document (wrong column count, missing
    /// header, inconsistent body). `line` is 1-based where known.
    #[error("format error{}: {message}", fmt_line(.line))]
    Format {
        line: Option<usize>,
        message: String,
    },

    /// A cell that should have been numeric was not.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration value is out of range or unknown.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A function argument violated a documented precondition.
    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument {
        name: &'static str,
        message: String,
    },

    /// An accelerometer channel with no usable samples at all.
    #[error("channel `{channel}` has no usable samples")]
    UnrecoverableChannel { channel: &'static str },

    /// A feature column with zero spread cannot be normalized.
    #[error("degenerate channel `{channel}`: zero variance in training data")]
    DegenerateChannel { channel: String },

    /// A labelled row falls outside the posture schedule.
    #[error("schedule does not cover t = {t} s")]
    Coverage { t: f64 },

    /// A pose angle outside the configured range of motion.
    #[error("{angle} = {value} rad exceeds range of motion ±{limit} rad")]
    RangeOfMotion {
        angle: &'static str,
        value: f64,
        limit: f64,
    },

    /// Range-of-motion (or similar) failure tagged with the offending frame.
    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    /// Unknown length unit token in a TRC header.
    #[error("unknown units `{token}` (expected m or mm)")]
    Units { token: String },

    /// Accelerometer magnitude too small for a gravity-tilt estimate.
    #[error("acceleration magnitude {magnitude:.4} g too small for tilt (free fall?)")]
    FreeFall { magnitude: f64 },

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {message}")]
    Domain { message: String },

    /// Row/column arity mismatch between related tables.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// A class with too few rows to split into train and test.
    #[error("class {class} has too few rows for a stratified split")]
    Stratification { class: String },

    /// Filesystem failure, tagged with the path involved.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A pipeline failure tagged with the stage it happened in.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a frame index to an error (used by per-frame trajectory code).
    pub fn at_frame(self, frame: usize) -> Self {
        Error::AtFrame {
            frame,
            source: Box::new(self),
        }
    }

    /// Wrap a `std::io::Error` with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a pipeline stage name to an error.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
