//! IMU CSV ingest and preprocessing: parse, repair, filter, aggregate,
//! label, normalize.

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};

use crate::error::Error;
use crate::types::{FeatureRow, LabeledFeatureRow, PostureLabel};
use crate::Result;

/// Accelerometer full scale in g; components beyond this are rejected.
pub const FULL_SCALE_G: f64 = 8.0;

/// Nominal sample rate of the sensor stream.
pub const DEFAULT_RATE_HZ: f64 = 100.0;

/// Scale factor turning a median absolute deviation into a robust sigma
/// estimate for normally distributed data.
const MAD_SIGMA: f64 = 1.4826;

const CHANNEL_NAMES: [&str; 3] = ["x", "y", "z"];

/// One accelerometer sample. A component is `None` when the source cell was
/// empty, `NaN`, or `NA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Milliseconds since the Unix epoch.
    pub epoch_ms: i64,
    /// Seconds since session start.
    pub elapsed_s: f64,
    /// Acceleration in g units, `[x, y, z]`.
    pub accel: [Option<f64>; 3],
}

/// An ordered accelerometer recording.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuSeries {
    pub samples: Vec<ImuSample>,
    /// Nominal sample rate in Hz.
    pub rate_hz: f64,
}

/// One second of aggregated data: the per-channel mean over that second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondRow {
    /// Whole second this row covers (`floor(elapsed_s)`).
    pub second: u64,
    /// Mean acceleration over the second, g units.
    pub accel: [f64; 3],
}

/// Per-channel mean and standard deviation fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Parse an IMU CSV export.
///
/// The expected header is
/// `epoch (ms),time (-),elapsed (s),x-axis (g),y-axis (g),z-axis (g)`;
/// column-name matching is on the leading keyword and the parenthesized
/// unit, both case-insensitive, so minor renderer variations still parse.
/// Accelerometer cells spelled `NaN`, `NA`, or left empty become missing
/// values for [`interpolate_missing`] to repair.
pub fn parse_imu_csv(text: &str) -> Result<ImuSeries> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| Error::Format {
        line: None,
        message: "empty input: missing header".into(),
    })?;
    validate_header(header_line, header)?;

    let mut samples: Vec<ImuSample> = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(Error::Format {
                line: Some(line_no),
                message: format!("expected 6 cells, found {}", cells.len()),
            });
        }
        let epoch_ms: i64 = cells[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad epoch `{}`", cells[0].trim()),
        })?;
        // cells[1] is the wall-clock string; informational only.
        let elapsed_s = parse_float_cell(cells[2], line_no, "elapsed")?;
        if !elapsed_s.is_finite() || elapsed_s < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("elapsed must be finite and non-negative, got {elapsed_s}"),
            });
        }
        let mut accel = [None; 3];
        for (c, slot) in accel.iter_mut().enumerate() {
            let cell = cells[3 + c].trim();
            if is_missing(cell) {
                continue;
            }
            let v = parse_float_cell(cell, line_no, CHANNEL_NAMES[c])?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{} acceleration not finite", CHANNEL_NAMES[c]),
                });
            }
            if v.abs() > FULL_SCALE_G {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!(
                        "{} acceleration {v} g exceeds full scale ±{FULL_SCALE_G} g",
                        CHANNEL_NAMES[c]
                    ),
                });
            }
            *slot = Some(v);
        }
        if let Some(prev) = samples.last() {
            if elapsed_s <= prev.elapsed_s {
                return Err(Error::Format {
                    line: Some(line_no),
                    message: format!(
                        "elapsed {elapsed_s} not greater than previous {}",
                        prev.elapsed_s
                    ),
                });
            }
        }
        samples.push(ImuSample {
            epoch_ms,
            elapsed_s,
            accel,
        });
    }

    let rate_hz = infer_rate_hz(&samples);
    Ok(ImuSeries { samples, rate_hz })
}

/// Recover the nominal rate from the median epoch spacing. Timestamps are
/// integer milliseconds, so a regular grid yields the rate exactly; with
/// fewer than two samples the default applies.
fn infer_rate_hz(samples: &[ImuSample]) -> f64 {
    let mut gaps: Vec<i64> = samples
        .windows(2)
        .map(|w| w[1].epoch_ms - w[0].epoch_ms)
        .filter(|g| *g > 0)
        .collect();
    if gaps.is_empty() {
        return DEFAULT_RATE_HZ;
    }
    gaps.sort_unstable();
    1000.0 / gaps[gaps.len() / 2] as f64
}

/// Expected columns as (keyword, unit, canonical spelling). The unit is
/// `None` where the column carries no unit worth checking.
const HEADER_COLUMNS: [(&str, Option<&str>, &str); 6] = [
    ("epoch", Some("ms"), "epoch (ms)"),
    ("time", None, "time (-)"),
    ("elapsed", Some("s"), "elapsed (s)"),
    ("x", Some("g"), "x-axis (g)"),
    ("y", Some("g"), "y-axis (g)"),
    ("z", Some("g"), "z-axis (g)"),
];

fn validate_header(line_no: usize, header: &str) -> Result<()> {
    let cells: Vec<&str> = header.split(',').collect();
    for (i, (keyword, unit, canonical)) in HEADER_COLUMNS.iter().enumerate() {
        let cell = cells.get(i).map(|c| c.trim().to_ascii_lowercase());
        let ok = cell.as_deref().is_some_and(|cell| {
            let name = cell.split('(').next().unwrap_or_default();
            let cell_unit = cell
                .split_once('(')
                .and_then(|(_, rest)| rest.split(')').next())
                .map(str::trim);
            name.contains(keyword)
                && match (unit, cell_unit) {
                    (Some(expected), Some(found)) => found == *expected,
                    (Some(_), None) => false,
                    (None, _) => true,
                }
        });
        if !ok {
            return Err(Error::Format {
                line: Some(line_no),
                message: format!("header missing column `{canonical}`"),
            });
        }
    }
    Ok(())
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan") || cell.eq_ignore_ascii_case("na")
}

fn parse_float_cell(cell: &str, line_no: usize, what: &str) -> Result<f64> {
    cell.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("bad {what} value `{}`", cell.trim()),
    })
}

/// Serialize a series in the same CSV dialect [`parse_imu_csv`] reads.
/// Floats use the shortest representation that round-trips bit-for-bit.
pub fn write_imu_csv(series: &ImuSeries) -> String {
    let mut out = String::with_capacity(series.samples.len() * 48 + 64);
    out.push_str("epoch (ms),time (-),elapsed (s),x-axis (g),y-axis (g),z-axis (g)\n");
    for s in &series.samples {
        let time = Utc
            .timestamp_millis_opt(s.epoch_ms)
            .single()
            .map(|dt| dt.format("%Y-%m-%dT%H:%M:%S%.3f").to_string())
            .unwrap_or_default();
        out.push_str(&format!("{},{time},{}", s.epoch_ms, s.elapsed_s));
        for c in 0..3 {
            match s.accel[c] {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push_str(",NaN"),
            }
        }
        out.push('\n');
    }
    out
}

/// Replace missing components by linear interpolation against `elapsed_s`
/// between the nearest present neighbours; leading and trailing gaps take
/// the nearest present value.
pub fn interpolate_missing(series: &ImuSeries) -> Result<ImuSeries> {
    let n = series.samples.len();
    let mut out = series.clone();
    for (c, &channel) in CHANNEL_NAMES.iter().enumerate() {
        let present: Vec<usize> = (0..n)
            .filter(|&i| series.samples[i].accel[c].is_some())
            .collect();
        if present.is_empty() {
            if n == 0 {
                continue; // an empty series has nothing to repair
            }
            return Err(Error::UnrecoverableChannel { channel });
        }
        let mut next_present = 0usize; // index into `present`
        for i in 0..n {
            if series.samples[i].accel[c].is_some() {
                continue;
            }
            while next_present < present.len() && present[next_present] < i {
                next_present += 1;
            }
            let after = present.get(next_present).copied();
            let before = if next_present > 0 {
                Some(present[next_present - 1])
            } else {
                None
            };
            let value = match (before, after) {
                (Some(b), Some(a)) => {
                    let (t0, v0) = (series.samples[b].elapsed_s, series.samples[b].accel[c]);
                    let (t1, v1) = (series.samples[a].elapsed_s, series.samples[a].accel[c]);
                    let (v0, v1) = (v0.unwrap(), v1.unwrap());
                    let t = series.samples[i].elapsed_s;
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
                (Some(b), None) => series.samples[b].accel[c].unwrap(),
                (None, Some(a)) => series.samples[a].accel[c].unwrap(),
                (None, None) => unreachable!("present is non-empty"),
            };
            out.samples[i].accel[c] = Some(value);
        }
    }
    Ok(out)
}

/// Hampel filter: replace any sample deviating from its centered rolling
/// median by more than `k · 1.4826 · MAD` with that median. Windows are
/// clipped at the series boundaries. The series must contain no missing
/// values (run [`interpolate_missing`] first).
pub fn remove_outliers(series: &ImuSeries, window: usize, k: f64) -> Result<ImuSeries> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidArgument {
            name: "window",
            message: format!("must be an odd integer ≥ 3, got {window}"),
        });
    }
    if !(k > 0.0) {
        return Err(Error::InvalidArgument {
            name: "k",
            message: format!("must be positive, got {k}"),
        });
    }
    let n = series.samples.len();
    let mut out = series.clone();
    let half = window / 2;
    for (c, &channel) in CHANNEL_NAMES.iter().enumerate() {
        let values: Vec<f64> = series
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.accel[c].ok_or(Error::InvalidArgument {
                    name: "series",
                    message: format!("missing {channel} value at sample {i}; interpolate first"),
                })
            })
            .collect::<Result<_>>()?;
        for i in 0..n {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let med = median(&values[lo..hi]);
            let deviations: Vec<f64> = values[lo..hi].iter().map(|v| (v - med).abs()).collect();
            let mad = median(&deviations);
            if (values[i] - med).abs() > k * MAD_SIGMA * mad {
                out.samples[i].accel[c] = Some(med);
            }
        }
    }
    Ok(out)
}

fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Bucket samples by `floor(elapsed_s)` and emit the per-channel mean of
/// each non-empty bucket, in time order. Missing components are excluded
/// from their channel mean; a bucket where some channel has no present
/// samples at all is skipped entirely.
pub fn aggregate_to_1hz(series: &ImuSeries) -> Result<Vec<SecondRow>> {
    if series.samples.is_empty() {
        return Err(Error::InvalidArgument {
            name: "series",
            message: "cannot aggregate an empty series".into(),
        });
    }
    let mut buckets: BTreeMap<u64, ([f64; 3], [u64; 3])> = BTreeMap::new();
    for s in &series.samples {
        let bucket = buckets
            .entry(s.elapsed_s.floor() as u64)
            .or_insert(([0.0; 3], [0; 3]));
        for c in 0..3 {
            if let Some(v) = s.accel[c] {
                bucket.0[c] += v;
                bucket.1[c] += 1;
            }
        }
    }
    Ok(buckets
        .into_iter()
        .filter(|(_, (_, counts))| counts.iter().all(|&n| n > 0))
        .map(|(second, (sums, counts))| SecondRow {
            second,
            accel: [
                sums[0] / counts[0] as f64,
                sums[1] / counts[1] as f64,
                sums[2] / counts[2] as f64,
            ],
        })
        .collect())
}

/// Parse a posture schedule: one `LABEL,duration_seconds` pair per line.
/// Blank lines are ignored.
pub fn parse_schedule(text: &str) -> Result<Vec<(PostureLabel, f64)>> {
    let mut schedule = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, duration) = line.split_once(',').ok_or_else(|| Error::Format {
            line: Some(line_no),
            message: "expected `LABEL,duration_seconds`".into(),
        })?;
        let label: PostureLabel = label.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("unknown posture label `{}`", label.trim()),
        })?;
        let duration: f64 = duration.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad duration `{}`", duration.trim()),
        })?;
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duration must be positive and finite, got {duration}"),
            });
        }
        schedule.push((label, duration));
    }
    if schedule.is_empty() {
        return Err(Error::Format {
            line: None,
            message: "schedule has no entries".into(),
        });
    }
    Ok(schedule)
}

/// Serialize a schedule in the format [`parse_schedule`] reads.
pub fn write_schedule(schedule: &[(PostureLabel, f64)]) -> String {
    let mut out = String::new();
    for (label, duration) in schedule {
        out.push_str(&format!("{label},{duration}\n"));
    }
    out
}

/// Label each row by the schedule interval containing its timestamp.
/// Intervals are half-open `[start, end)` measured from t = 0.
pub fn segment_by_schedule(
    rows: &[FeatureRow],
    schedule: &[(PostureLabel, f64)],
) -> Result<Vec<LabeledFeatureRow>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument {
            name: "schedule",
            message: "schedule has no entries".into(),
        });
    }
    let mut boundaries = Vec::with_capacity(schedule.len());
    let mut end = 0.0;
    for (label, duration) in schedule {
        if !(duration > &0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "schedule",
                message: format!("duration for {label} must be positive and finite"),
            });
        }
        end += duration;
        boundaries.push((end, *label));
    }
    rows.iter()
        .map(|row| {
            if row.t < 0.0 {
                return Err(Error::Coverage { t: row.t });
            }
            let label = boundaries
                .iter()
                .find(|(end, _)| row.t < *end)
                .map(|(_, label)| *label)
                .ok_or(Error::Coverage { t: row.t })?;
            Ok(LabeledFeatureRow {
                t: row.t,
                features: row.features.clone(),
                label,
            })
        })
        .collect()
}

/// Fit per-channel mean and sample standard deviation (n − 1 denominator)
/// on training rows.
pub fn fit_stats(train_rows: &[LabeledFeatureRow]) -> Result<ChannelStats> {
    let n = train_rows.len();
    if n < 2 {
        return Err(Error::InvalidArgument {
            name: "train_rows",
            message: format!("need at least 2 rows to fit statistics, got {n}"),
        });
    }
    let width = train_rows[0].features.len();
    for row in train_rows {
        if row.features.len() != width {
            return Err(Error::Shape {
                expected: width,
                got: row.features.len(),
            });
        }
        if row.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "train_rows",
                message: format!("non-finite feature at t = {}", row.t),
            });
        }
    }
    let mut mean = vec![0.0; width];
    for row in train_rows {
        for (m, v) in mean.iter_mut().zip(&row.features) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut std = vec![0.0; width];
    for row in train_rows {
        for (s, (v, m)) in std.iter_mut().zip(row.features.iter().zip(&mean)) {
            *s += (v - m) * (v - m);
        }
    }
    for (c, s) in std.iter_mut().enumerate() {
        *s = (*s / (n - 1) as f64).sqrt();
        if *s == 0.0 {
            return Err(Error::DegenerateChannel {
                channel: format!("feature {c}"),
            });
        }
    }
    Ok(ChannelStats { mean, std })
}

/// Apply a fitted z-score transform: `(x − mean) / std` per channel.
pub fn normalize(stats: &ChannelStats, rows: &[LabeledFeatureRow]) -> Result<Vec<LabeledFeatureRow>> {
    rows.iter()
        .map(|row| {
            if row.features.len() != stats.mean.len() {
                return Err(Error::Shape {
                    expected: stats.mean.len(),
                    got: row.features.len(),
                });
            }
            Ok(LabeledFeatureRow {
                t: row.t,
                features: row
                    .features
                    .iter()
                    .zip(stats.mean.iter().zip(&stats.std))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect(),
                label: row.label,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "epoch (ms),time (-),elapsed (s),x-axis (g),y-axis (g),z-axis (g)";

    fn series(values: &[(f64, [Option<f64>; 3])]) -> ImuSeries {
        ImuSeries {
            samples: values
                .iter()
                .map(|&(elapsed_s, accel)| ImuSample {
                    epoch_ms: (elapsed_s * 1000.0) as i64,
                    elapsed_s,
                    accel,
                })
                .collect(),
            rate_hz: DEFAULT_RATE_HZ,
        }
    }

    fn full(values: &[(f64, [f64; 3])]) -> ImuSeries {
        series(
            &values
                .iter()
                .map(|&(t, a)| (t, [Some(a[0]), Some(a[1]), Some(a[2])]))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn parses_a_plain_row() {
        let text = format!("{HEADER}\n1000,2019-07-01T00:00:01.000,0.010,0.01,0.98,0.05\n");
        let s = parse_imu_csv(&text).unwrap();
        assert_eq!(s.samples.len(), 1);
        assert_eq!(s.samples[0].epoch_ms, 1000);
        assert_eq!(s.samples[0].elapsed_s, 0.010);
        assert_eq!(s.samples[0].accel, [Some(0.01), Some(0.98), Some(0.05)]);
    }

    #[test]
    fn missing_cells_are_flagged_not_errors() {
        for token in ["NA", "NaN", "nan", ""] {
            let text = format!("{HEADER}\n1000,t,0.010,{token},0.98,0.05\n");
            let s = parse_imu_csv(&text).unwrap();
            assert_eq!(s.samples[0].accel[0], None, "token {token:?}");
            assert_eq!(s.samples[0].accel[1], Some(0.98));
        }
    }

    #[test]
    fn five_column_header_is_a_format_error() {
        let text = "epoch (ms),time (-),elapsed (s),x-axis (g),y-axis (g)\n";
        let err = parse_imu_csv(text).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(err.to_string().contains("z-axis"), "{err}");
    }

    #[test]
    fn wrong_units_in_header_are_rejected() {
        let text = "epoch (ms),time (-),elapsed (s),x-axis (deg/s),y-axis (g),z-axis (g)\n";
        assert!(matches!(
            parse_imu_csv(text),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn header_units_match_case_insensitively() {
        let text = "Epoch (MS),Time (-),Elapsed (S),X-Axis (G),Y-Axis (G),Z-Axis (G)\n\
                    1000,t,0.01,0.0,1.0,0.0\n";
        assert!(parse_imu_csv(text).is_ok());
    }

    #[test]
    fn bad_cell_reports_its_line() {
        let text = format!("{HEADER}\n1000,t,0.01,0.0,1.0,0.0\n2000,t,0.02,zap,1.0,0.0\n");
        match parse_imu_csv(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_increasing_elapsed_is_rejected() {
        let text = format!("{HEADER}\n1000,t,0.02,0.0,1.0,0.0\n2000,t,0.02,0.0,1.0,0.0\n");
        assert!(matches!(parse_imu_csv(&text), Err(Error::Format { .. })));
    }

    #[test]
    fn over_full_scale_is_rejected() {
        let text = format!("{HEADER}\n1000,t,0.01,9.5,1.0,0.0\n");
        assert!(matches!(parse_imu_csv(&text), Err(Error::Format { .. })));
    }

    #[test]
    fn interpolates_midpoint() {
        let s = series(&[
            (0.0, [Some(1.0), Some(0.0), Some(0.0)]),
            (1.0, [None, Some(0.0), Some(0.0)]),
            (2.0, [Some(3.0), Some(0.0), Some(0.0)]),
        ]);
        let fixed = interpolate_missing(&s).unwrap();
        assert_eq!(fixed.samples[1].accel[0], Some(2.0));
    }

    #[test]
    fn edge_gaps_take_nearest_value() {
        let s = series(&[
            (0.0, [None, Some(0.0), Some(0.0)]),
            (1.0, [Some(5.0), Some(0.0), Some(0.0)]),
        ]);
        let fixed = interpolate_missing(&s).unwrap();
        assert_eq!(fixed.samples[0].accel[0], Some(5.0));
    }

    #[test]
    fn all_missing_channel_is_unrecoverable() {
        let s = series(&[
            (0.0, [None, Some(0.0), Some(0.0)]),
            (1.0, [None, Some(0.0), Some(0.0)]),
        ]);
        assert!(matches!(
            interpolate_missing(&s),
            Err(Error::UnrecoverableChannel { channel: "x" })
        ));
    }

    #[test]
    fn interpolation_is_idempotent() {
        let s = series(&[
            (0.0, [None, Some(1.0), Some(2.0)]),
            (0.5, [Some(1.0), None, Some(2.0)]),
            (1.0, [Some(2.0), Some(3.0), None]),
            (2.0, [None, Some(4.0), Some(5.0)]),
        ]);
        let once = interpolate_missing(&s).unwrap();
        let twice = interpolate_missing(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn hampel_replaces_lone_spike() {
        let s = full(&[
            (0.0, [0.0, 1.0, 0.0]),
            (1.0, [0.0, 1.0, 0.0]),
            (2.0, [100.0 / 100.0, 1.0, 0.0]), // 1.0 g spike against 0 background
            (3.0, [0.0, 1.0, 0.0]),
            (4.0, [0.0, 1.0, 0.0]),
        ]);
        let filtered = remove_outliers(&s, 5, 3.0).unwrap();
        let xs: Vec<f64> = filtered.samples.iter().map(|s| s.accel[0].unwrap()).collect();
        assert_eq!(xs, vec![0.0; 5]);
    }

    #[test]
    fn hampel_keeps_constant_series() {
        let s = full(&[
            (0.0, [1.0, 1.0, 1.0]),
            (1.0, [1.0, 1.0, 1.0]),
            (2.0, [1.0, 1.0, 1.0]),
            (3.0, [1.0, 1.0, 1.0]),
            (4.0, [1.0, 1.0, 1.0]),
        ]);
        assert_eq!(remove_outliers(&s, 5, 3.0).unwrap(), s);
    }

    #[test]
    fn hampel_rejects_even_window() {
        let s = full(&[(0.0, [0.0; 3])]);
        assert!(matches!(
            remove_outliers(&s, 4, 3.0),
            Err(Error::InvalidArgument { name: "window", .. })
        ));
    }

    #[test]
    fn aggregate_means_per_second() {
        let s = full(&[
            (0.0, [0.0, 0.0, 0.0]),
            (0.5, [0.0, 2.0, 0.0]),
            (1.25, [1.0, 1.0, 1.0]),
        ]);
        let rows = aggregate_to_1hz(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].second, 0);
        assert_eq!(rows[0].accel, [0.0, 1.0, 0.0]);
        assert_eq!(rows[1].second, 1);
        assert_eq!(rows[1].accel, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn aggregate_skips_empty_seconds() {
        let s = full(&[(0.1, [1.0, 0.0, 0.0]), (5.1, [2.0, 0.0, 0.0])]);
        let rows = aggregate_to_1hz(&s).unwrap();
        assert_eq!(rows.iter().map(|r| r.second).collect::<Vec<_>>(), [0, 5]);
    }

    #[test]
    fn schedule_labels_respect_half_open_intervals() {
        let schedule = vec![(PostureLabel::Nm, 120.0), (PostureLabel::Nu, 120.0)];
        let rows = vec![
            FeatureRow { t: 119.0, features: vec![0.0] },
            FeatureRow { t: 120.0, features: vec![0.0] },
        ];
        let labeled = segment_by_schedule(&rows, &schedule).unwrap();
        assert_eq!(labeled[0].label, PostureLabel::Nm);
        assert_eq!(labeled[1].label, PostureLabel::Nu);
    }

    #[test]
    fn schedule_coverage_error_reports_orphan_time() {
        let schedule = vec![(PostureLabel::Nm, 240.0)];
        let rows = vec![FeatureRow { t: 241.0, features: vec![] }];
        match segment_by_schedule(&rows, &schedule) {
            Err(Error::Coverage { t }) => assert_eq!(t, 241.0),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn schedule_parse_roundtrip() {
        let text = "NM,120\nNU,60.5\n\nNRD,10\n";
        let schedule = parse_schedule(text).unwrap();
        assert_eq!(
            schedule,
            vec![
                (PostureLabel::Nm, 120.0),
                (PostureLabel::Nu, 60.5),
                (PostureLabel::Nrd, 10.0),
            ]
        );
        assert_eq!(parse_schedule(&write_schedule(&schedule)).unwrap(), schedule);
    }

    #[test]
    fn schedule_rejects_bad_label_with_line() {
        match parse_schedule("NM,120\nXX,5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn stats_match_two_point_example() {
        let rows = vec![
            LabeledFeatureRow { t: 0.0, features: vec![0.0], label: PostureLabel::Nm },
            LabeledFeatureRow { t: 1.0, features: vec![2.0], label: PostureLabel::Nm },
        ];
        let stats = fit_stats(&rows).unwrap();
        assert_eq!(stats.mean, vec![1.0]);
        assert!((stats.std[0] - 2.0_f64.sqrt()).abs() < 1e-15);
        let normalized = normalize(&stats, &rows).unwrap();
        assert!((normalized[0].features[0] + normalized[1].features[0]).abs() < 1e-15);
    }

    #[test]
    fn normalized_train_has_zero_mean_unit_std() {
        let rows: Vec<LabeledFeatureRow> = (0..50)
            .map(|i| LabeledFeatureRow {
                t: i as f64,
                features: vec![(i as f64).sin() * 3.0 + 1.0, i as f64 * 0.25 - 2.0],
                label: PostureLabel::Nm,
            })
            .collect();
        let stats = fit_stats(&rows).unwrap();
        let normalized = normalize(&stats, &rows).unwrap();
        let check = fit_stats(&normalized).unwrap();
        for c in 0..2 {
            assert!(check.mean[c].abs() < 1e-9);
            assert!((check.std[c] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_channel_is_degenerate() {
        let rows: Vec<LabeledFeatureRow> = (0..5)
            .map(|i| LabeledFeatureRow {
                t: i as f64,
                features: vec![7.0],
                label: PostureLabel::Nm,
            })
            .collect();
        assert!(matches!(
            fit_stats(&rows),
            Err(Error::DegenerateChannel { .. })
        ));
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_bit_exact(
            rows in proptest::collection::vec(
                (0i64..10_000_000, proptest::option::weighted(0.9, -8.0f64..8.0),
                 proptest::option::weighted(0.9, -8.0f64..8.0),
                 proptest::option::weighted(0.9, -8.0f64..8.0)),
                1..40,
            )
        ) {
            let samples: Vec<ImuSample> = rows
                .iter()
                .enumerate()
                .map(|(i, &(epoch, x, y, z))| ImuSample {
                    epoch_ms: epoch,
                    elapsed_s: i as f64 * 0.01 + (epoch % 997) as f64 * 1e-9,
                    accel: [x, y, z],
                })
                .collect();
            let series = ImuSeries { samples, rate_hz: DEFAULT_RATE_HZ };
            let text = write_imu_csv(&series);
            let back = parse_imu_csv(&text).unwrap();
            prop_assert_eq!(back.samples, series.samples);
        }

        #[test]
        fn interpolate_twice_equals_once(
            values in proptest::collection::vec(
                (proptest::option::weighted(0.7, -2.0f64..2.0),
                 proptest::option::weighted(0.7, -2.0f64..2.0),
                 proptest::option::weighted(0.7, -2.0f64..2.0)),
                2..30,
            )
        ) {
            let s = series(
                &values
                    .iter()
                    .enumerate()
                    .map(|(i, &(x, y, z))| (i as f64 * 0.01, [x, y, z]))
                    .collect::<Vec<_>>(),
            );
            // Ensure each channel has at least one present value.
            prop_assume!((0..3).all(|c| s.samples.iter().any(|smp| smp.accel[c].is_some())));
            let once = interpolate_missing(&s).unwrap();
            let twice = interpolate_missing(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn aggregate_matches_naive_bucket_means(
            values in proptest::collection::vec(-4.0f64..4.0, 3..200)
        ) {
            let s = full(
                &values
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (i as f64 * 0.13, [v, -v, v * 0.5]))
                    .collect::<Vec<_>>(),
            );
            let rows = aggregate_to_1hz(&s).unwrap();
            // Naive oracle: per second, sum and divide.
            for row in &rows {
                for c in 0..3 {
                    let bucket: Vec<f64> = s
                        .samples
                        .iter()
                        .filter(|smp| smp.elapsed_s.floor() as u64 == row.second)
                        .map(|smp| smp.accel[c].unwrap())
                        .collect();
                    let naive = bucket.iter().sum::<f64>() / bucket.len() as f64;
                    prop_assert!((row.accel[c] - naive).abs() < 1e-12);
                }
            }
            let last = s.samples.last().unwrap().elapsed_s;
            prop_assert!(rows.len() <= last.ceil() as usize + 1);
        }
    }
}
