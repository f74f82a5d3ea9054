//! Command-line interface for the neck-posture classification toolkit.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use neckpose::forest::{self, ForestParams};
use neckpose::ik::{self, IkSettings};
use neckpose::ingest;
use neckpose::kinetics;
use neckpose::pipeline::{self, run_pipeline, PipelineConfig, PipelineInput};
use neckpose::sim_io::{self, ReadMode, TrcMeta};
use neckpose::synth::{self, NoiseSpec};

#[derive(Parser)]
#[command(
    name = "neckpose",
    version,
    about = "Classify static neck postures from headband accelerometer data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic IMU session.
    Synth(SynthArgs),
    /// Parse an IMU CSV and print a summary.
    Ingest(IngestArgs),
    /// Interpolate missing samples and remove outliers.
    Preprocess(PreprocessArgs),
    /// Reconstruct a marker trajectory (TRC) from an IMU CSV.
    ToTrc(ToTrcArgs),
    /// Solve inverse kinematics on a marker trajectory.
    Ik(IkArgs),
    /// Compute tendon forces from a joint-angle file.
    Kinetics(KineticsArgs),
    /// Train a random forest on a feature CSV.
    Train(TrainArgs),
    /// Predict labels for a feature CSV with a saved forest.
    Predict(PredictArgs),
    /// Evaluate a saved forest against a labeled feature CSV.
    Evaluate(EvaluateArgs),
    /// Run the full session-to-report pipeline.
    Pipeline(PipelineArgs),
    /// Inspect the model.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Args)]
struct SynthArgs {
    /// Posture schedule file (`LABEL,seconds` per line); default 9 × 120 s.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample rate, Hz.
    #[arg(long, default_value_t = 100.0)]
    rate: f64,
    /// Accelerometer noise standard deviation, g.
    #[arg(long, default_value_t = 0.02)]
    accel_noise: f64,
    /// Posture jitter standard deviation, radians.
    #[arg(long, default_value_t = 0.02)]
    jitter: f64,
    /// Output IMU CSV path.
    #[arg(long)]
    out_csv: PathBuf,
    /// Optional ground-truth joint-angle file (MOT, degrees).
    #[arg(long)]
    out_truth: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Hampel window length (odd).
    #[arg(long, default_value_t = 11)]
    window: usize,
    /// Hampel threshold in scaled-MAD units.
    #[arg(long, default_value_t = 3.0)]
    k: f64,
}

#[derive(Args)]
struct ToTrcArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Model parameter file; defaults built in.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 11)]
    window: usize,
    #[arg(long, default_value_t = 3.0)]
    k: f64,
}

#[derive(Args)]
struct IkArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    trc: PathBuf,
    /// Output joint-angle file (MOT, degrees). A per-frame diagnostics
    /// report is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Start every frame from neutral instead of the previous solution.
    #[arg(long)]
    cold_start: bool,
}

#[derive(Args)]
struct KineticsArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Input joint-angle file (MOT).
    #[arg(long)]
    mot: PathBuf,
    /// Output force file (STO).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature CSV (`t,label,…`).
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Maximum tree depth; unlimited when omitted.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    forest: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output CSV (`t,predicted`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    forest: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Write report.txt / report.json / confusion.csv / metrics.csv here;
    /// prints the text report when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Key-value configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Feature source: imu, accel, position, tendon-force, or combined.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    input_csv: Option<PathBuf>,
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    accel_noise: Option<f64>,
    #[arg(long)]
    session_seed: Option<u64>,
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Print model geometry: markers, muscles, neutral lengths, limits.
    Dump(DumpArgs),
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => cmd_synth(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::ToTrc(args) => cmd_to_trc(args),
        Command::Ik(args) => cmd_ik(args),
        Command::Kinetics(args) => cmd_kinetics(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Model(ModelCommand::Dump(args)) => cmd_model_dump(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let schedule = pipeline::load_schedule(args.schedule.as_deref())?;
    let noise = NoiseSpec {
        accel_std: args.accel_noise,
        jitter_std: args.jitter,
        seed: args.seed,
    };
    let session = synth::simulate_session(&schedule, &noise, args.rate)?;
    write(&args.out_csv, &ingest::write_imu_csv(&session.imu))?;
    println!(
        "wrote {} samples ({} postures, {:.1} s) to {}",
        session.imu.samples.len(),
        schedule.len(),
        schedule.iter().map(|(_, d)| d).sum::<f64>(),
        args.out_csv.display()
    );
    if let Some(truth_path) = args.out_truth {
        let mot = sim_io::mot_from_joint_trajectory("truth", &session.truth, true)?;
        write(&truth_path, &sim_io::write_mot(&mot)?)?;
        println!("wrote ground-truth angles to {}", truth_path.display());
    }
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let series = ingest::parse_imu_csv(&read(&args.csv)?)?;
    let n = series.samples.len();
    let duration = series.samples.last().map_or(0.0, |s| s.elapsed_s);
    let missing: [usize; 3] = [0, 1, 2].map(|c| {
        series
            .samples
            .iter()
            .filter(|s| s.accel[c].is_none())
            .count()
    });
    println!("samples   {n}");
    println!("rate      {} Hz", series.rate_hz);
    println!("duration  {duration:.3} s");
    println!(
        "missing   x: {}, y: {}, z: {}",
        missing[0], missing[1], missing[2]
    );
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<()> {
    let series = ingest::parse_imu_csv(&read(&args.csv)?)?;
    let filled = ingest::interpolate_missing(&series)?;
    let cleaned = ingest::remove_outliers(&filled, args.window, args.k)?;
    write(&args.out, &ingest::write_imu_csv(&cleaned))?;
    println!(
        "wrote {} cleaned samples to {}",
        cleaned.samples.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_to_trc(args: ToTrcArgs) -> Result<()> {
    let model = pipeline::load_model(args.model.as_deref())?;
    let series = ingest::parse_imu_csv(&read(&args.csv)?)?;
    let filled = ingest::interpolate_missing(&series)?;
    let cleaned = ingest::remove_outliers(&filled, args.window, args.k)?;
    let seconds = ingest::aggregate_to_1hz(&cleaned)?;
    let set = pipeline::tilt_marker_set(&model, &seconds)?;
    let meta = TrcMeta::at_rate("markers", 1.0, set.frames.len());
    write(&args.out, &sim_io::write_trc(&set, &meta)?)?;
    println!(
        "wrote {} marker frames to {}",
        set.frames.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_ik(args: IkArgs) -> Result<()> {
    let model = pipeline::load_model(args.model.as_deref())?;
    let doc = sim_io::read_trc(&read(&args.trc)?, ReadMode::Strict)?;
    let set = sim_io::trc_to_marker_set(&doc);
    let result = ik::solve_trajectory(&model, &set, &IkSettings::default(), args.cold_start)?;
    let mot = sim_io::mot_from_joint_trajectory("ik", &result.trajectory, true)?;
    write(&args.out, &sim_io::write_mot(&mot)?)?;
    let report_path = args.out.with_extension("report.txt");
    write(&report_path, &ik::write_ik_report(&result))?;
    println!(
        "solved {} frames: {:.1}% converged, max rms {:.3e} m; report {}",
        result.frames.len(),
        100.0 * result.convergence_ratio(),
        result.max_rms_error(),
        report_path.display()
    );
    Ok(())
}

fn cmd_kinetics(args: KineticsArgs) -> Result<()> {
    let model = pipeline::load_model(args.model.as_deref())?;
    let doc = sim_io::read_mot(&read(&args.mot)?, ReadMode::Strict)?;
    let trajectory = sim_io::joint_trajectory_from_mot(&doc)?;
    let series = kinetics::compute_force_series(&model, &trajectory)?;
    let sto = sim_io::mot_from_force_series("forces", &series)?;
    write(&args.out, &sim_io::write_mot(&sto)?)?;
    println!(
        "wrote {} force rows x {} muscles to {}",
        series.times.len(),
        series.muscle_names.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (_, rows) = pipeline::read_features_csv(&read(&args.features)?)?;
    let features: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<_> = rows.iter().map(|r| r.label).collect();
    let params = ForestParams {
        n_trees: args.trees,
        max_depth: args.max_depth,
        min_samples_split: args.min_samples_split,
        seed: args.seed,
    };
    let trained = forest::fit(&features, &labels, &params)?;
    write(&args.out, &forest::save_forest(&trained))?;
    println!(
        "trained {} trees on {} rows x {} features; saved to {}",
        args.trees,
        features.len(),
        trained.n_features(),
        args.out.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let trained = forest::load_forest(&read(&args.forest)?)?;
    let (_, rows) = pipeline::read_features_csv(&read(&args.features)?)?;
    let mut out = String::from("t,predicted\n");
    for row in &rows {
        let label = trained.predict(&row.features)?;
        out.push_str(&format!("{},{label}\n", row.t));
    }
    match args.out {
        Some(path) => {
            write(&path, &out)?;
            println!("wrote {} predictions to {}", rows.len(), path.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let trained = forest::load_forest(&read(&args.forest)?)?;
    let (_, rows) = pipeline::read_features_csv(&read(&args.features)?)?;
    let features: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<_> = rows.iter().map(|r| r.label).collect();
    let report = forest::evaluate(&trained, &features, &labels)?;
    match args.out_dir {
        Some(dir) => {
            write(&dir.join("report.txt"), &report.render_text())?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write(&dir.join("report.json"), &(json + "\n"))?;
            write(&dir.join("confusion.csv"), &report.confusion_csv())?;
            write(&dir.join("metrics.csv"), &report.metrics_csv())?;
            println!("accuracy {:.6}; reports in {}", report.accuracy, dir.display());
        }
        None => print!("{}", report.render_text()),
    }
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::parse(&read(path)?)?,
        None => PipelineConfig::new("out"),
    };
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    if let Some(source) = args.source {
        config.feature_source = source.parse()?;
    }
    if args.input_csv.is_some() || args.schedule.is_some() {
        config.input = match args.input_csv {
            Some(imu) => PipelineInput::Csv {
                imu,
                schedule: args.schedule,
            },
            None => PipelineInput::Synthesize {
                schedule: args.schedule,
            },
        };
    }
    if let Some(noise) = args.accel_noise {
        config.noise.accel_std = noise;
    }
    if let Some(seed) = args.session_seed {
        config.noise.seed = seed;
    }
    let outcome = run_pipeline(&config)?;
    println!(
        "source {}: accuracy {:.6} (train {}, test {}); artifacts in {}",
        config.feature_source,
        outcome.report.accuracy,
        outcome.train_rows,
        outcome.test_rows,
        config.out_dir.display()
    );
    Ok(())
}

fn cmd_model_dump(args: DumpArgs) -> Result<()> {
    let model = pipeline::load_model(args.model.as_deref())?;
    let mut out = String::new();
    let rom = model.range_of_motion();
    out.push_str(&format!(
        "range of motion (rad): pitch ±{}, roll ±{}, yaw ±{}\n",
        rom.pitch, rom.roll, rom.yaw
    ));
    out.push_str(&format!(
        "links: {} x {} m, skull offset {} m\n\n",
        model.link_lengths().len(),
        model.link_lengths()[0],
        model.skull_offset()
    ));
    out.push_str("markers:\n");
    for m in model.markers() {
        out.push_str(&format!(
            "  {}\t{}\t({:.3}, {:.3}, {:.3})\n",
            m.name,
            m.segment.name(),
            m.offset.x,
            m.offset.y,
            m.offset.z
        ));
    }
    out.push_str("\nmuscles (neutral length m, slack m, stiffness N/m):\n");
    let lengths = model.neutral_muscle_lengths();
    for (muscle, length) in model.muscles().iter().zip(lengths) {
        out.push_str(&format!(
            "  {}\t{} -> {}\t{:.5}\t{:.5}\t{}\n",
            muscle.name,
            muscle.origin.0.name(),
            muscle.insertion.0.name(),
            length,
            muscle.slack_length,
            muscle.stiffness
        ));
    }
    match args.out {
        Some(path) => write(&path, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}
