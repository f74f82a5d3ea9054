//! TRC (marker trajectories) and MOT/STO (labelled columns) readers and
//! writers, interoperable with common motion-capture tooling.
//!
//! Writers always emit tab-delimited text with 8-decimal fixed formatting.
//! Readers run in [`ReadMode::Strict`] (our own files: counts validated,
//! tabs only) or [`ReadMode::Tolerant`] (external files: whitespace
//! delimiters, counts recomputed from the body).

use crate::error::Error;
use crate::kinetics::MuscleForceSeries;
use crate::model::{JointTrajectory, MarkerTrajectorySet, NeckPose};
use crate::Result;

/// How forgiving a reader should be; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadMode {
    Strict,
    Tolerant,
}

/// Length units of a TRC file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Meters,
    Millimeters,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Meters => "m",
            Units::Millimeters => "mm",
        }
    }

    pub fn parse(token: &str) -> Result<Units> {
        match token.to_ascii_lowercase().as_str() {
            "m" => Ok(Units::Meters),
            "mm" => Ok(Units::Millimeters),
            _ => Err(Error::Units {
                token: token.to_string(),
            }),
        }
    }
}

/// TRC header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TrcMeta {
    /// File name recorded on the first header line.
    pub name: String,
    pub data_rate: f64,
    pub camera_rate: f64,
    pub units: Units,
    pub orig_data_rate: f64,
    pub orig_start_frame: usize,
    pub orig_num_frames: usize,
}

impl TrcMeta {
    /// Metadata for a trajectory sampled at `rate` Hz, units meters.
    pub fn at_rate(name: &str, rate: f64, num_frames: usize) -> TrcMeta {
        TrcMeta {
            name: name.to_string(),
            data_rate: rate,
            camera_rate: rate,
            units: Units::Meters,
            orig_data_rate: rate,
            orig_start_frame: 1,
            orig_num_frames: num_frames,
        }
    }
}

/// One TRC data row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrcFrame {
    pub number: usize,
    pub time: f64,
    pub positions: Vec<[f64; 3]>,
}

/// A parsed TRC file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrcDocument {
    pub meta: TrcMeta,
    pub num_frames: usize,
    pub num_markers: usize,
    pub marker_names: Vec<String>,
    pub frames: Vec<TrcFrame>,
}

/// A parsed MOT/STO file. `rows` hold the values exactly as printed in the
/// file (degrees when `in_degrees`); the first column is time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct MotDocument {
    pub name: String,
    pub in_degrees: bool,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn fmt8(v: f64) -> String {
    format!("{v:.8}")
}

/// Serialize marker trajectories as a TRC character stream.
pub fn write_trc(set: &MarkerTrajectorySet, meta: &TrcMeta) -> Result<String> {
    if set.frames.is_empty() {
        return Err(Error::InvalidArgument {
            name: "set",
            message: "cannot write a TRC file with no frames".into(),
        });
    }
    let num_markers = set.marker_names.len();
    for (i, frame) in set.frames.iter().enumerate() {
        if frame.positions.len() != num_markers {
            return Err(Error::InvalidArgument {
                name: "set",
                message: format!(
                    "frame {i} has {} markers, expected {num_markers}",
                    frame.positions.len()
                ),
            });
        }
    }
    let num_frames = set.frames.len();

    let mut out = String::new();
    out.push_str(&format!("PathFileType\t4\t(X/Y/Z)\t{}\n", meta.name));
    out.push_str(
        "DataRate\tCameraRate\tNumFrames\tNumMarkers\tUnits\tOrigDataRate\tOrigDataStartFrame\tOrigNumFrames\n",
    );
    out.push_str(&format!(
        "{}\t{}\t{num_frames}\t{num_markers}\t{}\t{}\t{}\t{}\n",
        fmt8(meta.data_rate),
        fmt8(meta.camera_rate),
        meta.units.as_str(),
        fmt8(meta.orig_data_rate),
        meta.orig_start_frame,
        meta.orig_num_frames,
    ));
    out.push_str("Frame#\tTime");
    for name in &set.marker_names {
        out.push_str(&format!("\t{name}\t\t"));
    }
    out.push('\n');
    out.push('\t');
    for i in 1..=num_markers {
        out.push_str(&format!("\tX{i}\tY{i}\tZ{i}"));
    }
    out.push('\n');
    out.push('\n');
    for (i, frame) in set.frames.iter().enumerate() {
        out.push_str(&format!("{}\t{}", i + 1, fmt8(frame.t)));
        for p in &frame.positions {
            out.push_str(&format!("\t{}\t{}\t{}", fmt8(p.x), fmt8(p.y), fmt8(p.z)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a TRC character stream.
pub fn read_trc(text: &str, mode: ReadMode) -> Result<TrcDocument> {
    let strict = mode == ReadMode::Strict;
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 5 {
        return Err(Error::Format {
            line: None,
            message: "TRC file too short: missing header lines".into(),
        });
    }

    // Line 1: PathFileType <version> (X/Y/Z) <name>
    let l1: Vec<&str> = split_line(lines[0], mode);
    if l1.first().copied() != Some("PathFileType") {
        return Err(Error::Format {
            line: Some(1),
            message: "expected `PathFileType` header".into(),
        });
    }
    let name = l1.get(3).copied().unwrap_or_default().to_string();

    // Line 2: metadata field names.
    if strict && split_line(lines[1], mode).first().copied() != Some("DataRate") {
        return Err(Error::Format {
            line: Some(2),
            message: "expected metadata field names starting with `DataRate`".into(),
        });
    }

    // Line 3: metadata values.
    let l3 = split_line(lines[2], mode);
    if l3.len() < 8 {
        return Err(Error::Format {
            line: Some(3),
            message: format!("expected 8 metadata values, found {}", l3.len()),
        });
    }
    let data_rate = parse_num::<f64>(l3[0], 3, "DataRate")?;
    let camera_rate = parse_num::<f64>(l3[1], 3, "CameraRate")?;
    let header_frames = parse_num::<usize>(l3[2], 3, "NumFrames")?;
    let header_markers = parse_num::<usize>(l3[3], 3, "NumMarkers")?;
    let units = Units::parse(l3[4])?;
    let orig_data_rate = parse_num::<f64>(l3[5], 3, "OrigDataRate")?;
    let orig_start_frame = parse_num::<usize>(l3[6], 3, "OrigDataStartFrame")?;
    let orig_num_frames = parse_num::<usize>(l3[7], 3, "OrigNumFrames")?;

    // Line 4: Frame# Time <names>.
    let marker_names = parse_marker_name_line(lines[3], mode)?;
    if strict && marker_names.len() != header_markers {
        return Err(Error::Format {
            line: Some(4),
            message: format!(
                "header NumMarkers={header_markers} but {} marker names listed",
                marker_names.len()
            ),
        });
    }
    let num_markers = marker_names.len();

    // Line 5 holds the X1/Y1/Z1 labels; not needed to reconstruct data.
    // Data rows follow, usually after one blank separator line.
    let mut frames = Vec::new();
    for (idx, raw) in lines.iter().enumerate().skip(5) {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cells = split_line(raw, mode);
        let expected = 2 + 3 * num_markers;
        if cells.len() != expected {
            return Err(Error::Format {
                line: Some(line_no),
                message: format!("expected {expected} cells, found {}", cells.len()),
            });
        }
        let number = parse_num::<usize>(cells[0], line_no, "frame number")?;
        let time = parse_num::<f64>(cells[1], line_no, "time")?;
        let mut positions = Vec::with_capacity(num_markers);
        for m in 0..num_markers {
            positions.push([
                parse_num::<f64>(cells[2 + 3 * m], line_no, "X")?,
                parse_num::<f64>(cells[3 + 3 * m], line_no, "Y")?,
                parse_num::<f64>(cells[4 + 3 * m], line_no, "Z")?,
            ]);
        }
        if strict {
            let expected_number = frames.len() + 1;
            if number != expected_number {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!("frame number {number}, expected {expected_number}"),
                });
            }
        }
        frames.push(TrcFrame {
            number,
            time,
            positions,
        });
    }
    if strict && frames.len() != header_frames {
        return Err(Error::Format {
            line: None,
            message: format!(
                "header NumFrames={header_frames} but {} data rows found",
                frames.len()
            ),
        });
    }

    Ok(TrcDocument {
        meta: TrcMeta {
            name,
            data_rate,
            camera_rate,
            units,
            orig_data_rate,
            orig_start_frame,
            orig_num_frames,
        },
        num_frames: frames.len(),
        num_markers,
        marker_names,
        frames,
    })
}

fn split_line(line: &str, mode: ReadMode) -> Vec<&str> {
    match mode {
        ReadMode::Strict => line.split('\t').collect(),
        ReadMode::Tolerant => line.split_whitespace().collect(),
    }
}

fn parse_marker_name_line(line: &str, mode: ReadMode) -> Result<Vec<String>> {
    match mode {
        ReadMode::Strict => {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() < 2 || cells[0] != "Frame#" || cells[1] != "Time" {
                return Err(Error::Format {
                    line: Some(4),
                    message: "expected `Frame#\tTime\t<marker names>`".into(),
                });
            }
            // Each marker contributes (name, "", "").
            let mut names = Vec::new();
            let mut i = 2;
            while i < cells.len() {
                if cells[i].is_empty() {
                    // trailing padding
                    if cells[i..].iter().any(|c| !c.is_empty()) {
                        return Err(Error::Format {
                            line: Some(4),
                            message: "marker name cells out of phase".into(),
                        });
                    }
                    break;
                }
                names.push(cells[i].to_string());
                i += 3;
            }
            Ok(names)
        }
        ReadMode::Tolerant => Ok(line
            .split_whitespace()
            .skip(2) // Frame#, Time
            .map(str::to_string)
            .collect()),
    }
}

fn parse_num<T: std::str::FromStr>(cell: &str, line: usize, what: &str) -> Result<T> {
    cell.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} value `{}`", cell.trim()),
    })
}

/// Convert a TRC document back into a marker trajectory set (positions in
/// meters regardless of file units).
pub fn trc_to_marker_set(doc: &TrcDocument) -> MarkerTrajectorySet {
    let scale = match doc.meta.units {
        Units::Meters => 1.0,
        Units::Millimeters => 1e-3,
    };
    MarkerTrajectorySet {
        marker_names: doc.marker_names.clone(),
        frames: doc
            .frames
            .iter()
            .map(|f| crate::model::MarkerFrame {
                t: f.time,
                positions: f
                    .positions
                    .iter()
                    .map(|p| nalgebra::Point3::new(p[0] * scale, p[1] * scale, p[2] * scale))
                    .collect(),
            })
            .collect(),
    }
}

/// Serialize a MOT/STO document.
pub fn write_mot(doc: &MotDocument) -> Result<String> {
    if doc.labels.is_empty() || doc.labels[0] != "time" {
        return Err(Error::InvalidArgument {
            name: "doc",
            message: "first column label must be `time`".into(),
        });
    }
    let width = doc.labels.len();
    let mut previous_time = f64::NEG_INFINITY;
    for (i, row) in doc.rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Shape {
                expected: width,
                got: row.len(),
            });
        }
        if row[0] <= previous_time {
            return Err(Error::InvalidArgument {
                name: "doc",
                message: format!("time not strictly increasing at row {i}"),
            });
        }
        previous_time = row[0];
    }

    let mut out = String::new();
    out.push_str(&format!("{}\n", doc.name));
    out.push_str("version=1\n");
    out.push_str(&format!("nRows={}\n", doc.rows.len()));
    out.push_str(&format!("nColumns={width}\n"));
    out.push_str(&format!(
        "inDegrees={}\n",
        if doc.in_degrees { "yes" } else { "no" }
    ));
    out.push_str("endheader\n");
    out.push_str(&doc.labels.join("\t"));
    out.push('\n');
    for row in &doc.rows {
        let cells: Vec<String> = row.iter().map(|v| fmt8(*v)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    Ok(out)
}

/// Parse a MOT/STO character stream.
pub fn read_mot(text: &str, mode: ReadMode) -> Result<MotDocument> {
    let strict = mode == ReadMode::Strict;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, name) = lines.next().ok_or_else(|| Error::Format {
        line: None,
        message: "empty MOT file".into(),
    })?;
    let name = name.trim().to_string();

    let mut n_rows: Option<usize> = None;
    let mut n_columns: Option<usize> = None;
    let mut in_degrees = false;
    let mut saw_endheader = false;
    for (line_no, line) in lines.by_ref() {
        let line = line.trim();
        if line == "endheader" {
            saw_endheader = true;
            break;
        }
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            if strict {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!("expected `key=value` or `endheader`, got `{line}`"),
                });
            }
            continue;
        };
        match key.trim() {
            "version" => {}
            "nRows" => n_rows = Some(parse_num(value, line_no, "nRows")?),
            "nColumns" => n_columns = Some(parse_num(value, line_no, "nColumns")?),
            "inDegrees" => {
                in_degrees = match value.trim().to_ascii_lowercase().as_str() {
                    "yes" => true,
                    "no" => false,
                    other => {
                        return Err(Error::Format {
                            line: Some(line_no),
                            message: format!("inDegrees must be yes or no, got `{other}`"),
                        })
                    }
                }
            }
            other if strict => {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!("unknown header key `{other}`"),
                })
            }
            _ => {}
        }
    }
    if !saw_endheader {
        return Err(Error::Format {
            line: None,
            message: "missing `endheader`".into(),
        });
    }

    let (labels_line_no, labels_line) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::Format {
            line: None,
            message: "missing column label row".into(),
        })?;
    let labels: Vec<String> = split_line(labels_line, mode)
        .into_iter()
        .map(str::to_string)
        .collect();
    if labels.first().map(String::as_str) != Some("time") {
        return Err(Error::Format {
            line: Some(labels_line_no),
            message: "first column label must be `time`".into(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells = split_line(line, mode);
        if cells.len() != labels.len() {
            return Err(Error::Format {
                line: Some(line_no),
                message: format!("expected {} cells, found {}", labels.len(), cells.len()),
            });
        }
        let row: Vec<f64> = cells
            .iter()
            .map(|c| parse_num::<f64>(c, line_no, "data"))
            .collect::<Result<_>>()?;
        if let Some(prev) = rows.last() {
            if row[0] <= prev[0] {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!("time not strictly increasing ({} after {})", row[0], prev[0]),
                });
            }
        }
        rows.push(row);
    }

    if strict {
        if let Some(n) = n_rows {
            if n != rows.len() {
                return Err(Error::Format {
                    line: None,
                    message: format!("nRows={n} but {} data rows found", rows.len()),
                });
            }
        }
        if let Some(n) = n_columns {
            if n != labels.len() {
                return Err(Error::Format {
                    line: None,
                    message: format!("nColumns={n} but {} labels found", labels.len()),
                });
            }
        }
    }

    Ok(MotDocument {
        name,
        in_degrees,
        labels,
        rows,
    })
}

/// Column labels used for neck joint trajectories.
pub const JOINT_LABELS: [&str; 4] = ["time", "neck_pitch", "neck_roll", "neck_yaw"];

/// Package a joint trajectory as a MOT document, converting radians to
/// degrees when `in_degrees`.
pub fn mot_from_joint_trajectory(
    name: &str,
    traj: &JointTrajectory,
    in_degrees: bool,
) -> Result<MotDocument> {
    if traj.times.len() != traj.poses.len() {
        return Err(Error::Shape {
            expected: traj.times.len(),
            got: traj.poses.len(),
        });
    }
    let convert = |v: f64| if in_degrees { v.to_degrees() } else { v };
    Ok(MotDocument {
        name: name.to_string(),
        in_degrees,
        labels: JOINT_LABELS.iter().map(|s| s.to_string()).collect(),
        rows: traj
            .times
            .iter()
            .zip(&traj.poses)
            .map(|(&t, pose)| {
                vec![
                    t,
                    convert(pose.pitch),
                    convert(pose.roll),
                    convert(pose.yaw),
                ]
            })
            .collect(),
    })
}

/// Recover a joint trajectory from a MOT document with the neck joint
/// labels, converting degrees back to radians when flagged.
pub fn joint_trajectory_from_mot(doc: &MotDocument) -> Result<JointTrajectory> {
    if doc.labels != JOINT_LABELS {
        return Err(Error::Format {
            line: None,
            message: format!(
                "expected columns {:?}, found {:?}",
                JOINT_LABELS, doc.labels
            ),
        });
    }
    let convert = |v: f64| if doc.in_degrees { v.to_radians() } else { v };
    let mut times = Vec::with_capacity(doc.rows.len());
    let mut poses = Vec::with_capacity(doc.rows.len());
    for row in &doc.rows {
        times.push(row[0]);
        poses.push(NeckPose::new(
            convert(row[1]),
            convert(row[2]),
            convert(row[3]),
        ));
    }
    Ok(JointTrajectory { times, poses })
}

/// Package a tendon-force series as an STO-style document (forces carry no
/// angle units, so `inDegrees=no`).
pub fn mot_from_force_series(name: &str, series: &MuscleForceSeries) -> Result<MotDocument> {
    if series.times.len() != series.rows.len() {
        return Err(Error::Shape {
            expected: series.times.len(),
            got: series.rows.len(),
        });
    }
    let mut labels = vec!["time".to_string()];
    labels.extend(series.muscle_names.iter().cloned());
    Ok(MotDocument {
        name: name.to_string(),
        in_degrees: false,
        labels,
        rows: series
            .times
            .iter()
            .zip(&series.rows)
            .map(|(&t, forces)| {
                let mut row = Vec::with_capacity(forces.len() + 1);
                row.push(t);
                row.extend_from_slice(forces);
                row
            })
            .collect(),
    })
}
