//! End-to-end pipeline: sensor data (real or synthesized) through
//! preprocessing, the optional model path (markers → inverse kinematics →
//! tendon forces), feature assembly, split, training, and evaluation, with
//! every intermediate written as a file readable by this crate's own
//! parsers.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::Error;
use crate::forest::{self, EvaluationReport, ForestParams};
use crate::ik::{self, IkSettings};
use crate::ingest;
use crate::kinetics;
use crate::model::{
    build_default_model, marker_positions, tilt_from_accel, MarkerFrame, MarkerTrajectorySet,
    ModelConfig, NeckModel, NeckPose,
};
use crate::sim_io::{self, ReadMode, TrcMeta};
use crate::synth::{self, accel_reading, NoiseSpec};
use crate::types::{FeatureRow, LabeledFeatureRow, PostureLabel};
use crate::Result;

/// Which per-second feature columns feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    /// Preprocessed accelerometer channels straight from the recording.
    Imu,
    /// Accelerometer channels re-synthesized from the solved poses.
    Accel,
    /// The three solved joint angles.
    Position,
    /// The eight tendon-force columns.
    TendonForce,
    /// Position ⊕ accel ⊕ tendon force (3 + 3 + 8 columns).
    Combined,
}

impl FeatureSource {
    pub const ALL: [FeatureSource; 5] = [
        FeatureSource::Imu,
        FeatureSource::Accel,
        FeatureSource::Position,
        FeatureSource::TendonForce,
        FeatureSource::Combined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::Imu => "imu",
            FeatureSource::Accel => "accel",
            FeatureSource::Position => "position",
            FeatureSource::TendonForce => "tendon-force",
            FeatureSource::Combined => "combined",
        }
    }

    /// Everything except raw IMU goes through markers + inverse kinematics.
    fn needs_model(self) -> bool {
        !matches!(self, FeatureSource::Imu)
    }

    fn needs_forces(self) -> bool {
        matches!(self, FeatureSource::TendonForce | FeatureSource::Combined)
    }
}

impl fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSource::ALL
            .into_iter()
            .find(|source| source.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config {
                field: "feature_source".into(),
                message: format!(
                    "unknown source `{s}` (expected imu, accel, position, tendon-force, or combined)"
                ),
            })
    }
}

/// Where the session comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineInput {
    /// Generate a session; `schedule` file overrides the default 9 × 120 s.
    Synthesize { schedule: Option<PathBuf> },
    /// Read a recorded IMU CSV; `schedule` labels its timeline.
    Csv {
        imu: PathBuf,
        schedule: Option<PathBuf>,
    },
}

/// Full configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PipelineInput,
    /// Model parameter file; `None` uses the built-in defaults.
    pub model_config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub feature_source: FeatureSource,
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Synthesis noise levels and session seed.
    pub noise: NoiseSpec,
    pub rate_hz: f64,
    pub hampel_window: usize,
    pub hampel_k: f64,
    pub forest: ForestParams,
}

impl PipelineConfig {
    /// Defaults: synthesize the standard session, classify raw IMU features.
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: PipelineInput::Synthesize { schedule: None },
            model_config: None,
            out_dir: out_dir.into(),
            feature_source: FeatureSource::Imu,
            split_ratio: 0.75,
            split_seed: 42,
            noise: NoiseSpec::default(),
            rate_hz: ingest::DEFAULT_RATE_HZ,
            hampel_window: 11,
            hampel_k: 3.0,
            forest: ForestParams::default(),
        }
    }

    /// Parse a plain-text `key = value` configuration. Blank lines and `#`
    /// comments are ignored; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::new("out");
        let mut input_csv: Option<PathBuf> = None;
        let mut schedule: Option<PathBuf> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
                line: Some(i + 1),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |message: String| Error::Config {
                field: key.to_string(),
                message,
            };
            match key {
                "input_csv" => input_csv = Some(PathBuf::from(value)),
                "schedule" => schedule = Some(PathBuf::from(value)),
                "model_config" => config.model_config = Some(PathBuf::from(value)),
                "out_dir" => config.out_dir = PathBuf::from(value),
                "feature_source" => config.feature_source = value.parse()?,
                "split_ratio" => config.split_ratio = parse_value(value, bad)?,
                "split_seed" => config.split_seed = parse_value(value, bad)?,
                "session_seed" => config.noise.seed = parse_value(value, bad)?,
                "accel_noise" => config.noise.accel_std = parse_value(value, bad)?,
                "jitter" => config.noise.jitter_std = parse_value(value, bad)?,
                "rate_hz" => config.rate_hz = parse_value(value, bad)?,
                "hampel_window" => config.hampel_window = parse_value(value, bad)?,
                "hampel_k" => config.hampel_k = parse_value(value, bad)?,
                "n_trees" => config.forest.n_trees = parse_value(value, bad)?,
                "min_samples_split" => config.forest.min_samples_split = parse_value(value, bad)?,
                "forest_seed" => config.forest.seed = parse_value(value, bad)?,
                "max_depth" => {
                    config.forest.max_depth = if value == "none" {
                        None
                    } else {
                        Some(parse_value(value, bad)?)
                    }
                }
                other => {
                    return Err(Error::Config {
                        field: other.to_string(),
                        message: "unknown configuration key".into(),
                    })
                }
            }
        }
        config.input = match input_csv {
            Some(imu) => PipelineInput::Csv { imu, schedule },
            None => PipelineInput::Synthesize { schedule },
        };
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config {
                field: "split_ratio".into(),
                message: format!(
                    "must be strictly between 0 and 1, got {}",
                    self.split_ratio
                ),
            });
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(value: &str, bad: impl Fn(String) -> Error) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(format!("invalid value `{value}`")))
}

/// What a finished run returns beyond its artifact files.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub report: EvaluationReport,
    pub feature_names: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Read a posture schedule file, or fall back to the default 9 × 120 s.
pub fn load_schedule(path: Option<&Path>) -> Result<Vec<(PostureLabel, f64)>> {
    match path {
        Some(p) => ingest::parse_schedule(&read_file(p)?),
        None => Ok(synth::default_schedule()),
    }
}

/// Reconstruct a marker trajectory from aggregated accelerometer rows:
/// gravity-tilt pose per row (yaw unobservable, set to zero; clamped to the
/// range of motion) pushed through forward kinematics.
pub fn tilt_marker_set(
    model: &NeckModel,
    seconds: &[ingest::SecondRow],
) -> Result<MarkerTrajectorySet> {
    let rom = *model.range_of_motion();
    let frames = seconds
        .iter()
        .map(|row| {
            let (pitch, roll) = tilt_from_accel(row.accel)?;
            let pose = rom.clamp(&NeckPose::new(pitch, roll, 0.0));
            Ok(MarkerFrame {
                t: row.second as f64,
                positions: marker_positions(model, &pose)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarkerTrajectorySet {
        marker_names: model.marker_names(),
        frames,
    })
}

/// Build the model from a parameter file, or the built-in defaults.
pub fn load_model(path: Option<&Path>) -> Result<NeckModel> {
    let config = match path {
        Some(p) => ModelConfig::parse(&read_file(p)?)?,
        None => ModelConfig::default(),
    };
    build_default_model(&config)
}

/// Run the full pipeline and write all artifacts into `config.out_dir`.
/// Identical configurations produce byte-identical artifacts.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(&config.out_dir, e).at_stage("setup"))?;
    let out = config.out_dir.as_path();

    // Obtain the raw series and its labeling schedule.
    let (series, schedule) = match &config.input {
        PipelineInput::Synthesize { schedule } => (|| {
            let schedule = load_schedule(schedule.as_deref())?;
            let session = synth::simulate_session(&schedule, &config.noise, config.rate_hz)?;
            write_file(out, "imu.csv", &ingest::write_imu_csv(&session.imu))?;
            Ok((session.imu, schedule))
        })()
        .map_err(|e: Error| e.at_stage("synth"))?,
        PipelineInput::Csv { imu, schedule } => (|| {
            let series = ingest::parse_imu_csv(&read_file(imu)?)?;
            Ok((series, load_schedule(schedule.as_deref())?))
        })()
        .map_err(|e: Error| e.at_stage("ingest"))?,
    };

    // Interpolate, despike, aggregate to one row per second.
    let seconds = (|| {
        let filled = ingest::interpolate_missing(&series)?;
        let cleaned = ingest::remove_outliers(&filled, config.hampel_window, config.hampel_k)?;
        ingest::aggregate_to_1hz(&cleaned)
    })()
    .map_err(|e| e.at_stage("preprocess"))?;

    // The model path: gravity-tilt poses → markers → IK → forces.
    let source = config.feature_source;
    let mut solved: Option<(NeckModel, Vec<NeckPose>)> = None;
    let mut forces: Option<Vec<Vec<f64>>> = None;
    if source.needs_model() {
        let (model, marker_set) = (|| {
            let model = load_model(config.model_config.as_deref())?;
            let set = tilt_marker_set(&model, &seconds)?;
            let meta = TrcMeta::at_rate("markers", 1.0, set.frames.len());
            let trc_text = sim_io::write_trc(&set, &meta)?;
            write_file(out, "markers.trc", &trc_text)?;
            // Feed the solver from the written artifact, not the in-memory
            // set, so the file formats stay load-bearing.
            let reread = sim_io::trc_to_marker_set(&sim_io::read_trc(&trc_text, ReadMode::Strict)?);
            Ok((model, reread))
        })()
        .map_err(|e: Error| e.at_stage("markers"))?;

        let trajectory = (|| {
            let result = ik::solve_trajectory(&model, &marker_set, &IkSettings::default(), false)?;
            let mot = sim_io::mot_from_joint_trajectory("ik", &result.trajectory, true)?;
            write_file(out, "ik.mot", &sim_io::write_mot(&mot)?)?;
            write_file(out, "ik_report.txt", &ik::write_ik_report(&result))?;
            Ok(result.trajectory)
        })()
        .map_err(|e: Error| e.at_stage("ik"))?;

        if source.needs_forces() {
            let rows = (|| {
                let series = kinetics::compute_force_series(&model, &trajectory)?;
                let sto = sim_io::mot_from_force_series("forces", &series)?;
                write_file(out, "forces.sto", &sim_io::write_mot(&sto)?)?;
                Ok(series.rows)
            })()
            .map_err(|e: Error| e.at_stage("kinetics"))?;
            forces = Some(rows);
        }
        solved = Some((model, trajectory.poses));
    }

    // Assemble one labeled feature row per second.
    let (feature_names, labeled) = (|| {
        let mut names = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); seconds.len()];
        if source == FeatureSource::Imu {
            names.extend(["accel_x", "accel_y", "accel_z"].map(String::from));
            for (row, second) in columns.iter_mut().zip(&seconds) {
                row.extend_from_slice(&second.accel);
            }
        }
        if let Some((model, poses)) = &solved {
            if matches!(source, FeatureSource::Position | FeatureSource::Combined) {
                names.extend(["neck_pitch", "neck_roll", "neck_yaw"].map(String::from));
                for (row, pose) in columns.iter_mut().zip(poses) {
                    row.extend_from_slice(&pose.to_array());
                }
            }
            if matches!(source, FeatureSource::Accel | FeatureSource::Combined) {
                names.extend(["accel_x", "accel_y", "accel_z"].map(String::from));
                for (row, pose) in columns.iter_mut().zip(poses) {
                    row.extend_from_slice(&accel_reading(pose));
                }
            }
            if source.needs_forces() {
                names.extend(model.muscle_names());
                let force_rows = forces.as_ref().expect("forces computed above");
                for (row, force) in columns.iter_mut().zip(force_rows) {
                    row.extend_from_slice(force);
                }
            }
        }
        let rows: Vec<FeatureRow> = seconds
            .iter()
            .zip(columns)
            .map(|(second, features)| FeatureRow {
                t: second.second as f64,
                features,
            })
            .collect();
        let labeled = ingest::segment_by_schedule(&rows, &schedule)?;
        write_file(out, "features.csv", &write_features_csv(&names, &labeled))?;
        Ok((names, labeled))
    })()
    .map_err(|e: Error| e.at_stage("features"))?;

    // Stratified split, train-only normalization, training, evaluation.
    let labels: Vec<PostureLabel> = labeled.iter().map(|r| r.label).collect();
    let (train_idx, test_idx) =
        forest::stratified_split(&labels, config.split_ratio, config.split_seed)
            .map_err(|e| e.at_stage("split"))?;

    let select = |idx: &[usize]| -> Vec<LabeledFeatureRow> {
        idx.iter().map(|&i| labeled[i].clone()).collect()
    };
    let (train, test) = (|| {
        let stats = ingest::fit_stats(&select(&train_idx))?;
        Ok((
            ingest::normalize(&stats, &select(&train_idx))?,
            ingest::normalize(&stats, &select(&test_idx))?,
        ))
    })()
    .map_err(|e: Error| e.at_stage("normalize"))?;

    let unzip = |rows: &[LabeledFeatureRow]| -> (Vec<Vec<f64>>, Vec<PostureLabel>) {
        rows.iter()
            .map(|r| (r.features.clone(), r.label))
            .unzip()
    };
    let (train_x, train_y) = unzip(&train);
    let trained = (|| {
        let trained = forest::fit(&train_x, &train_y, &config.forest)?;
        write_file(out, "forest.txt", &forest::save_forest(&trained))?;
        Ok(trained)
    })()
    .map_err(|e: Error| e.at_stage("train"))?;

    let (test_x, test_y) = unzip(&test);
    let report =
        forest::evaluate(&trained, &test_x, &test_y).map_err(|e| e.at_stage("evaluate"))?;

    (|| {
        write_file(out, "report.txt", &report.render_text())?;
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(out, "report.json", &(json + "\n"))?;
        write_file(out, "confusion.csv", &report.confusion_csv())?;
        write_file(out, "metrics.csv", &report.metrics_csv())
    })()
    .map_err(|e: Error| e.at_stage("report"))?;

    Ok(PipelineOutcome {
        report,
        feature_names,
        train_rows: train.len(),
        test_rows: test.len(),
    })
}

/// Feature table as CSV: `t,label,<feature names…>`, floats in shortest
/// round-trip form.
pub fn write_features_csv(names: &[String], rows: &[LabeledFeatureRow]) -> String {
    let mut out = String::from("t,label");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{}", row.t, row.label));
        for v in &row.features {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV written by [`write_features_csv`]. Returns the feature
/// column names and the labeled rows.
pub fn read_features_csv(text: &str) -> Result<(Vec<String>, Vec<LabeledFeatureRow>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Format {
        line: None,
        message: "empty feature file".into(),
    })?;
    let mut fields = header.split(',');
    if fields.next() != Some("t") || fields.next() != Some("label") {
        return Err(Error::Format {
            line: Some(1),
            message: format!("expected header `t,label,…`, got `{header}`"),
        });
    }
    let names: Vec<String> = fields.map(String::from).collect();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let t: f64 = cells
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid time in `{line}`"),
            })?;
        let label: PostureLabel =
            cells
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid label in `{line}`"),
                })?;
        let features: Vec<f64> = cells
            .map(|cell| {
                cell.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid feature value `{cell}`"),
                })
            })
            .collect::<Result<_>>()?;
        if features.len() != names.len() {
            return Err(Error::Format {
                line: Some(line_no),
                message: format!(
                    "expected {} feature values, got {}",
                    names.len(),
                    features.len()
                ),
            });
        }
        rows.push(LabeledFeatureRow { t, features, label });
    }
    Ok((names, rows))
}
