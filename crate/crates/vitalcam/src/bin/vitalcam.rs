//! `vitalcam` command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 recording rejected by the quality
//! gate, 4 processing fault.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use vitalcam::config::Config;
use vitalcam::corpus::{write_corpus, CorpusSpec};
use vitalcam::evaluate::{evaluate_corpus, summarize, write_per_file, write_summary};
use vitalcam::formats::{read_bp_coefficients, read_trace_file, AnnotationSidecar};
use vitalcam::pipeline::{analyze_trace, analyze_video, Analysis, PipelineConfig, DEFAULT_FRAME_SIZE};
use vitalcam::service::ProcessResponse;
use vitalcam::storage::{SessionRecord, Store};
use vitalcam::video::DefaultDecoder;
use vitalcam::Error;
use vitalcam_core::roi::{QualityAssessment, RoiMode};
use vitalcam_core::vitals::{ChannelMode, Reading, VitalsReport};

const BAD_INPUT: u8 = 2;
const REJECTED: u8 = 3;
const FAULT: u8 = 4;

#[derive(Parser)]
#[command(name = "vitalcam", version, about = "Vital signs from facial video color traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate vitals for one trace CSV or video.
    Process(ProcessArgs),
    /// Score a directory of traces against their `.truth.json` files.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus from a TOML spec.
    Simulate(SimulateArgs),
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "VITALCAM_CONFIG")]
        config: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ProcessArgs {
    /// Trace CSV (`.csv`) or video file.
    input: PathBuf,
    /// Annotation sidecar JSON, required for videos.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// skin_mask or full_box.
    #[arg(long, value_parser = wire::<RoiMode>)]
    roi_mode: Option<RoiMode>,
    /// green or chrominance.
    #[arg(long, value_parser = wire::<ChannelMode>)]
    channel: Option<ChannelMode>,
    /// Frame size of a trace's source video, WIDTHxHEIGHT.
    #[arg(long, value_parser = frame_size)]
    frame_size: Option<(usize, usize)>,
    #[arg(long)]
    bp_coefficients: Option<PathBuf>,
    /// Store the result as a session.
    #[arg(long)]
    save: bool,
    /// Session database for --save when processing locally.
    #[arg(long, default_value = "data/sessions.db")]
    db: PathBuf,
    /// Send the input to a running service instead of processing locally.
    #[arg(long, env = "VITALCAM_SERVER_URL")]
    server_url: Option<String>,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    corpus: PathBuf,
    /// Also write one row per file to this CSV.
    #[arg(long)]
    per_file: Option<PathBuf>,
    #[arg(long, value_parser = wire::<ChannelMode>)]
    channel: Option<ChannelMode>,
    #[arg(long)]
    bp_coefficients: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Parses a snake_case wire name through the type's serde representation.
fn wire<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn frame_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or(format!("bad dimension `{v}`"));
    Ok((parse(w)?, parse(h)?))
}

/// A failure together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_bad_input() { BAD_INPUT } else { FAULT };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();
    let outcome = match cli.command {
        Command::Process(args) => process(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Simulate(args) => simulate(args),
        Command::Serve { config } => serve(config.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn pipeline_config(
    roi_mode: Option<RoiMode>,
    channel: Option<ChannelMode>,
    bp: Option<&Path>,
) -> Result<PipelineConfig, Failure> {
    let mut config = PipelineConfig::default();
    if let Some(m) = roi_mode {
        config.roi_mode = m;
    }
    if let Some(c) = channel {
        config.vitals.channel_mode = c;
    }
    if let Some(path) = bp {
        config.vitals.bp_model = read_bp_coefficients(path)?;
    }
    Ok(config)
}

fn is_trace(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn process(args: ProcessArgs) -> Result<u8, Failure> {
    if !args.input.is_file() {
        return Err(fail(BAD_INPUT, format!("{}: no such file", args.input.display())));
    }
    if !is_trace(&args.input) && args.annotations.is_none() {
        return Err(fail(BAD_INPUT, "a video needs --annotations"));
    }
    if let Some(url) = &args.server_url {
        return process_remote(&args, url);
    }
    let config = pipeline_config(args.roi_mode, args.channel, args.bp_coefficients.as_deref())?;
    let started = Instant::now();
    let analysis: Analysis = if is_trace(&args.input) {
        let trace = read_trace_file(&args.input)?;
        analyze_trace(&trace, args.frame_size.unwrap_or(DEFAULT_FRAME_SIZE), &config)?
    } else {
        let sidecar = AnnotationSidecar::read_file(args.annotations.as_deref().expect("checked above"))?;
        analyze_video(&args.input, &sidecar, &DefaultDecoder, &config)?
    };
    let bp_time_s = started.elapsed().as_secs_f64();
    let Some(report) = analysis.report else {
        print_rejection(&analysis.quality);
        return Ok(REJECTED);
    };
    let session_id = if args.save {
        if let Some(dir) = args.db.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", dir.display())))?;
        }
        let store = Store::open(&args.db)?;
        let name = args.input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        Some(store.save_session(&SessionRecord::new(name, report))?)
    } else {
        None
    };
    print_report(&analysis.quality, &report, bp_time_s, session_id, None);
    Ok(0)
}

fn process_remote(args: &ProcessArgs, url: &str) -> Result<u8, Failure> {
    use reqwest::blocking::multipart::{Form, Part};

    let read = |p: &Path| std::fs::read(p).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", p.display())));
    let file_name = args.input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut metadata = json!({ "save": args.save });
    if let Some(m) = args.roi_mode {
        metadata["roi_mode"] = json!(m);
    }
    if let Some(c) = args.channel {
        metadata["channel"] = json!(c);
    }
    if let Some((w, h)) = args.frame_size {
        metadata["frame_width"] = json!(w);
        metadata["frame_height"] = json!(h);
    }
    let payload = Part::bytes(read(&args.input)?).file_name(file_name);
    let mut form = Form::new().text("metadata", metadata.to_string());
    form = if is_trace(&args.input) {
        form.part("trace", payload)
    } else {
        let ann = read(args.annotations.as_deref().expect("checked by caller"))?;
        form.part("video", payload).part("annotations", Part::bytes(ann).file_name("annotations.json"))
    };

    let started = Instant::now();
    let endpoint = format!("{}/api/v1/process", url.trim_end_matches('/'));
    let response = reqwest::blocking::Client::builder()
        .timeout(None)
        .build()
        .and_then(|c| c.post(&endpoint).multipart(form).send())
        .map_err(|e| fail(FAULT, format!("{endpoint}: {e}")))?;
    let status = response.status().as_u16();
    let body: Value = response.json().map_err(|e| fail(FAULT, format!("unreadable response: {e}")))?;
    let sr_time_s = started.elapsed().as_secs_f64();
    let message = || body["message"].as_str().unwrap_or("request failed").to_owned();
    match status {
        200 => {
            let r: ProcessResponse =
                serde_json::from_value(body).map_err(|e| fail(FAULT, format!("unexpected response: {e}")))?;
            print_report(&r.quality, &r.report, r.bp_time_s, r.session_id, Some(sr_time_s));
            Ok(0)
        }
        422 => {
            let quality: QualityAssessment = serde_json::from_value(body["quality"].clone())
                .map_err(|e| fail(FAULT, format!("unexpected response: {e}")))?;
            print_rejection(&quality);
            Ok(REJECTED)
        }
        400 | 404 | 413 => Err(fail(BAD_INPUT, format!("server rejected the request ({status}): {}", message()))),
        _ => Err(fail(FAULT, format!("server error ({status}): {}", message()))),
    }
}

fn fmt_value(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_default()
}

fn readings(r: &VitalsReport) -> [(&'static str, Reading); 6] {
    [
        ("hr_bpm", r.hr_bpm),
        ("hrv_ms", r.hrv_ms),
        ("spo2_percent", r.spo2_percent),
        ("rr_brpm", r.rr_brpm),
        ("sbp_mmhg", r.sbp_mmhg),
        ("dbp_mmhg", r.dbp_mmhg),
    ]
}

fn print_report(
    quality: &QualityAssessment,
    report: &VitalsReport,
    bp_time_s: f64,
    session_id: Option<i64>,
    sr_time_s: Option<f64>,
) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "verdict={}", quality.verdict.as_str());
    for (name, reading) in readings(report) {
        let _ = writeln!(out, "{name}={}", fmt_value(reading.value));
        let _ = writeln!(out, "{name}_validity={}", reading.validity);
    }
    let _ = writeln!(out, "stress={}", report.stress);
    let _ = writeln!(out, "bp_time_s={bp_time_s:.4}");
    if let Some(sr) = sr_time_s {
        let _ = writeln!(out, "sr_time_s={sr:.4}");
    }
    if let Some(id) = session_id {
        let _ = writeln!(out, "session_id={id}");
    }

    let show = |r: Reading, unit: &str| match r.value {
        Some(v) => format!("{v:.1} {unit} ({})", r.validity),
        None => "unavailable".to_owned(),
    };
    eprintln!("heart rate      {}", show(report.hr_bpm, "bpm"));
    eprintln!("HRV (RMSSD)     {}", show(report.hrv_ms, "ms"));
    eprintln!("SpO2            {}", show(report.spo2_percent, "%"));
    eprintln!("breathing rate  {}", show(report.rr_brpm, "breaths/min"));
    eprintln!("blood pressure  {} / {}", show(report.sbp_mmhg, "mmHg"), show(report.dbp_mmhg, "mmHg"));
    eprintln!("stress          {}", report.stress);
}

fn print_rejection(quality: &QualityAssessment) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "verdict={}", quality.verdict.as_str());
    let codes: Vec<&str> = quality.message_codes.iter().map(|c| c.as_str()).collect();
    let _ = writeln!(out, "message_codes={}", codes.join(","));
    if let Some(code) = quality.primary_message() {
        eprintln!("recording rejected: {}", code.message());
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn evaluate(args: EvaluateArgs) -> Result<u8, Failure> {
    let config = pipeline_config(None, args.channel, args.bp_coefficients.as_deref())?;
    let results = evaluate_corpus(&args.corpus, &config)?;
    let rows = summarize(&results);
    write_summary(std::io::stdout().lock(), &rows)?;
    if let Some(path) = &args.per_file {
        write_per_file(create(path)?, &results)?;
    }
    let rejected = results.iter().filter(|r| r.verdict.is_some() && r.report.is_none()).count();
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    eprintln!("evaluated {} recordings: {rejected} rejected, {failed} failed", results.len());
    for row in &rows {
        if let Some(v) = row.value {
            eprintln!("  {:<18} {v:>10.3}  (n={})", row.metric, row.n);
        }
    }
    Ok(0)
}

fn simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let spec = CorpusSpec::read_file(&args.spec)?;
    let written = write_corpus(&spec, args.count, &args.out)?;
    let mut out = std::io::stdout().lock();
    for path in &written {
        let _ = writeln!(out, "{}", path.display());
    }
    eprintln!("wrote {} traces to {}", written.len(), args.out.display());
    Ok(0)
}

fn serve(config: Option<&Path>) -> Result<u8, Failure> {
    let config = Config::load(config)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| fail(FAULT, e.to_string()))?;
    runtime.block_on(vitalcam::service::serve(config))?;
    Ok(0)
}
