//! End-to-end tests that drive the compiled binary the way a user would.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neckpose::ingest;
use neckpose::pipeline;
use neckpose::sim_io::{self, ReadMode};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neckpose"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{tag}"));
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("clear scratch dir");
    }
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn assert_ok(out: &Output, what: &str) -> String {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_short_schedule(dir: &Path, seconds: u32) -> PathBuf {
    let path = dir.join("schedule.csv");
    let text: String = ["NU", "ND", "NR", "NL", "NRU", "NRD", "NLU", "NLD", "NM"]
        .iter()
        .map(|label| format!("{label},{seconds}\n"))
        .collect();
    fs::write(&path, text).expect("write schedule");
    path
}

#[test]
fn synth_writes_a_parseable_csv_and_truth_file() {
    let dir = scratch("synth");
    let schedule = write_short_schedule(&dir, 4);
    let csv = dir.join("imu.csv");
    let truth = dir.join("truth.mot");
    let out = bin()
        .args(["synth", "--rate", "25", "--seed", "7"])
        .arg("--schedule")
        .arg(&schedule)
        .arg("--out-csv")
        .arg(&csv)
        .arg("--out-truth")
        .arg(&truth)
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "synth");
    assert!(stdout.contains("900 samples"), "stdout: {stdout}");

    let series = ingest::parse_imu_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(series.samples.len(), 900);
    assert_eq!(series.rate_hz, 25.0);
    assert!(series.samples.iter().all(|s| s.accel.iter().all(|c| c.is_some())));

    let mot = sim_io::read_mot(&fs::read_to_string(&truth).unwrap(), ReadMode::Strict).unwrap();
    assert!(mot.in_degrees);
    assert_eq!(mot.rows.len(), 900);
    assert_eq!(mot.labels, ["time", "neck_pitch", "neck_roll", "neck_yaw"]);
}

#[test]
fn csv_chain_through_trc_ik_and_kinetics() {
    let dir = scratch("chain");
    let schedule = write_short_schedule(&dir, 4);
    let csv = dir.join("imu.csv");
    let out = bin()
        .args(["synth", "--rate", "25", "--seed", "3"])
        .arg("--schedule")
        .arg(&schedule)
        .arg("--out-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_ok(&out, "synth");

    let trc = dir.join("markers.trc");
    let out = bin()
        .arg("to-trc")
        .arg("--csv")
        .arg(&csv)
        .arg("--out")
        .arg(&trc)
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "to-trc");
    assert!(stdout.contains("36 marker frames"), "stdout: {stdout}");

    let mot = dir.join("ik.mot");
    let out = bin()
        .arg("ik")
        .arg("--trc")
        .arg(&trc)
        .arg("--out")
        .arg(&mot)
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "ik");
    assert!(stdout.contains("solved 36 frames"), "stdout: {stdout}");
    assert!(stdout.contains("100.0% converged"), "stdout: {stdout}");
    let report = fs::read_to_string(dir.join("ik.report.txt")).unwrap();
    assert!(report.starts_with("frames 36"), "report: {report}");

    let angles =
        sim_io::read_mot(&fs::read_to_string(&mot).unwrap(), ReadMode::Strict).unwrap();
    assert_eq!(angles.rows.len(), 36);
    assert!(angles.in_degrees);

    let sto = dir.join("forces.sto");
    let out = bin()
        .arg("kinetics")
        .arg("--mot")
        .arg(&mot)
        .arg("--out")
        .arg(&sto)
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "kinetics");
    assert!(stdout.contains("36 force rows x 8 muscles"), "stdout: {stdout}");
    let forces = sim_io::read_mot(&fs::read_to_string(&sto).unwrap(), ReadMode::Strict).unwrap();
    assert_eq!(forces.rows.len(), 36);
    assert_eq!(forces.labels.len(), 1 + 8);
    for row in &forces.rows {
        assert!(row[1..].iter().all(|f| *f >= 0.0), "negative force in {row:?}");
    }
}

#[test]
fn pipeline_artifacts_feed_train_predict_and_evaluate() {
    let dir = scratch("pipeline");
    let schedule = write_short_schedule(&dir, 8);
    let run_dir = dir.join("run");
    let out = bin()
        .arg("pipeline")
        .arg("--schedule")
        .arg(&schedule)
        .arg("--out")
        .arg(&run_dir)
        .args(["--source", "imu", "--session-seed", "9"])
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "pipeline");
    assert!(stdout.contains("source imu: accuracy"), "stdout: {stdout}");
    for name in [
        "imu.csv",
        "features.csv",
        "forest.txt",
        "report.txt",
        "report.json",
        "confusion.csv",
        "metrics.csv",
    ] {
        assert!(run_dir.join(name).exists(), "missing artifact {name}");
    }

    let features = run_dir.join("features.csv");
    let (names, rows) =
        pipeline::read_features_csv(&fs::read_to_string(&features).unwrap()).unwrap();
    assert_eq!(names, ["accel_x", "accel_y", "accel_z"]);
    assert_eq!(rows.len(), 72);

    let forest = dir.join("retrained.txt");
    let out = bin()
        .arg("train")
        .arg("--features")
        .arg(&features)
        .arg("--out")
        .arg(&forest)
        .args(["--trees", "30", "--seed", "5"])
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "train");
    assert!(stdout.contains("trained 30 trees on 72 rows"), "stdout: {stdout}");

    let predictions = dir.join("predictions.csv");
    let out = bin()
        .arg("predict")
        .arg("--forest")
        .arg(&forest)
        .arg("--features")
        .arg(&features)
        .arg("--out")
        .arg(&predictions)
        .output()
        .unwrap();
    assert_ok(&out, "predict");
    let text = fs::read_to_string(&predictions).unwrap();
    assert_eq!(text.lines().count(), 73);
    assert_eq!(text.lines().next(), Some("t,predicted"));

    let eval_dir = dir.join("eval");
    let out = bin()
        .arg("evaluate")
        .arg("--forest")
        .arg(&forest)
        .arg("--features")
        .arg(&features)
        .arg("--out-dir")
        .arg(&eval_dir)
        .output()
        .unwrap();
    let stdout = assert_ok(&out, "evaluate");
    assert!(stdout.contains("accuracy"), "stdout: {stdout}");
    for name in ["report.txt", "report.json", "confusion.csv", "metrics.csv"] {
        assert!(eval_dir.join(name).exists(), "missing report {name}");
    }
    let report = fs::read_to_string(eval_dir.join("report.txt")).unwrap();
    assert!(report.contains("accuracy"), "report: {report}");
}

#[test]
fn pipeline_with_missing_input_reports_the_failing_stage() {
    let dir = scratch("missing-input");
    let out = bin()
        .arg("pipeline")
        .arg("--input-csv")
        .arg(dir.join("does-not-exist.csv"))
        .arg("--out")
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stage ingest"), "stderr: {stderr}");
}

#[test]
fn model_dump_describes_the_geometry() {
    let out = bin().args(["model", "dump"]).output().unwrap();
    let stdout = assert_ok(&out, "model dump");
    for needle in [
        "range of motion",
        "links: 7",
        "RFHD",
        "sternohyoid",
        "omohyoid",
        "digastric-ant",
    ] {
        assert!(stdout.contains(needle), "missing `{needle}` in:\n{stdout}");
    }
}

#[test]
fn synth_rejects_a_negative_rate() {
    let dir = scratch("bad-rate");
    let out = bin()
        .args(["synth", "--rate", "-5"])
        .arg("--out-csv")
        .arg(dir.join("imu.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
