//! Command-line front end: `simulate`, `codec`, `eval` and `listen`.
//!
//! Exit codes are 0 for success, 1 for any error and 2 when a simulation
//! finished but broke the latency budget. Machine-readable output goes to
//! stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::net::UdpSocket;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::eval::{
    evaluate, render_metrics_table, render_range_table, GroundTruthSet, PredictionSet,
    DEFAULT_CONF_THRESH,
};
use crate::sdsm::{self, SensorDataSharingMessage};
use crate::sim::{self, TimingMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const OBU_ENDPOINT_ENV: &str = "WILDNET_OBU_ENDPOINT";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "wildnet",
    version,
    about = "Thermal deer detection to V2X alert pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario end to end and report latencies and deliveries.
    Simulate(SimulateArgs),
    /// Encode, decode or dump SDSM binaries.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Print every SDSM received on a UDP port as a JSON line.
    Listen(ListenArgs),
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Radio and timing seed; defaults to the scenario's own (7 if unset).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Also send every encoded SDSM to this OBU (host[:port]).
    #[arg(long, env = OBU_ENDPOINT_ENV)]
    pub obu_endpoint: Option<String>,
    /// Time capture, SDSM generation and decode with the monotonic clock.
    /// Reports are then no longer reproducible.
    #[arg(long)]
    pub measured_timing: bool,
    #[arg(long)]
    pub driver_warn_conf: Option<f64>,
    #[arg(long)]
    pub broadcast_conf: Option<f64>,
    #[arg(long)]
    pub confirm_frames: Option<u32>,
    #[arg(long)]
    pub assoc_iou: Option<f64>,
    #[arg(long)]
    pub max_age_frames: Option<u32>,
    #[arg(long)]
    pub hot_weather: bool,
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    /// JSON message to binary.
    Encode {
        input: PathBuf,
        /// Output file; raw bytes go to stdout if omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Binary to JSON.
    Decode {
        input: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Annotated hex with per-field bit offsets.
    Dump { input: PathBuf },
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    pub ground_truth: PathBuf,
    pub predictions: PathBuf,
    /// Confidence cut for precision, recall, F1, confusion and range bins.
    #[arg(long, default_value_t = DEFAULT_CONF_THRESH)]
    pub conf: f64,
    /// Print the metric table instead of JSON.
    #[arg(long)]
    pub table: bool,
    /// Print accuracy by distance band instead of JSON.
    #[arg(long)]
    pub bins: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ListenArgs {
    #[arg(long, default_value_t = crate::v2x::DEFAULT_OBU_PORT)]
    pub port: u16,
    #[arg(long, default_value = "0.0.0.0")]
    pub bind: String,
    /// Exit after this many decoded messages.
    #[arg(long)]
    pub count: Option<u64>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn with_path<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, stdout, stderr),
        Command::Codec(c) => codec(c, stdout),
        Command::Eval(a) => eval(a, stdout),
        Command::Listen(a) => listen(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<(), Failure> {
    let mut f = std::fs::File::create(path).map_err(with_path(path))?;
    write_json(value, &mut f)
}

fn simulate(
    a: SimulateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut scenario = sim::load_scenario(&a.scenario).map_err(with_path(&a.scenario))?;
    if let Some(seed) = a.seed {
        scenario.radio.rng_seed = seed;
    }
    if a.obu_endpoint.is_some() {
        scenario.obu_endpoint = a.obu_endpoint;
    }
    if a.measured_timing {
        scenario.timing = TimingMode::Measured;
    }
    let t = &mut scenario.thresholds;
    if let Some(v) = a.driver_warn_conf {
        t.driver_warn_conf = v;
    }
    if let Some(v) = a.broadcast_conf {
        t.broadcast_conf = v;
    }
    if let Some(v) = a.confirm_frames {
        t.confirm_frames = v;
    }
    if let Some(v) = a.assoc_iou {
        t.assoc_iou = v;
    }
    if let Some(v) = a.max_age_frames {
        t.max_age_frames = v;
    }
    if a.hot_weather {
        t.hot_weather_mode = true;
    }
    t.validate()
        .map_err(|e| Failure(format!("thresholds: {e}")))?;

    let report = sim::run(&scenario)?;
    let summary = sim::render_summary(&report);
    match (a.format, &a.out) {
        (_, Some(path)) => write_json_file(&report, path)?,
        (Format::Json, None) => write_json(&report, stdout)?,
        (Format::Text, None) => write!(stdout, "{summary}")?,
    }
    if a.format == Format::Json || a.out.is_some() {
        let _ = write!(stderr, "{summary}");
    }
    if !report.complete {
        return Err(Failure(format!(
            "simulation stopped early: {}",
            report.error.as_deref().unwrap_or("unknown")
        )));
    }
    Ok(if report.budget.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn codec(c: CodecCommand, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match c {
        CodecCommand::Encode { input, out } => {
            let text = std::fs::read_to_string(&input).map_err(with_path(&input))?;
            let msg: SensorDataSharingMessage =
                serde_json::from_str(&text).map_err(with_path(&input))?;
            let bytes = sdsm::encode(&msg)?;
            match out {
                Some(p) => std::fs::write(&p, &bytes).map_err(with_path(&p))?,
                None => stdout.write_all(&bytes)?,
            }
        }
        CodecCommand::Decode { input, out } => {
            let bytes = std::fs::read(&input).map_err(with_path(&input))?;
            let msg = sdsm::decode(&bytes)?;
            match out {
                Some(p) => write_json_file(&msg, &p)?,
                None => write_json(&msg, stdout)?,
            }
        }
        CodecCommand::Dump { input } => {
            let bytes = std::fs::read(&input).map_err(with_path(&input))?;
            let text = sdsm::dump(&bytes);
            write!(stdout, "{text}")?;
            if let Err(e) = sdsm::decode(&bytes) {
                return Err(e.into());
            }
        }
    }
    Ok(EXIT_OK)
}

fn eval(a: EvalArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if !(0.0..=1.0).contains(&a.conf) {
        return Err(Failure(format!("--conf {} outside [0, 1]", a.conf)));
    }
    let gt = GroundTruthSet::from_path(&a.ground_truth).map_err(with_path(&a.ground_truth))?;
    let preds = PredictionSet::from_path(&a.predictions).map_err(with_path(&a.predictions))?;
    let report = evaluate(&gt, &preds, a.conf)?;
    let table = a.table || a.format == Format::Text;
    let bins = a.bins || a.format == Format::Text;
    if bins && report.range_bins.is_none() {
        return Err(Failure(
            "range bins need est_distance_ft on every ground-truth box".into(),
        ));
    }
    if let Some(p) = &a.out {
        write_json_file(&report, p)?;
    }
    if !table && !bins {
        if a.out.is_none() {
            write_json(&report, stdout)?;
        }
        return Ok(EXIT_OK);
    }
    if table {
        write!(stdout, "{}", render_metrics_table(&report))?;
    }
    if let (true, Some(b)) = (bins, &report.range_bins) {
        if table {
            writeln!(stdout)?;
        }
        write!(stdout, "{}", render_range_table(b))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ReceivedAlert<'a> {
    received_unix_ms: u64,
    from: String,
    bytes: usize,
    message: &'a SensorDataSharingMessage,
}

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn listen(a: ListenArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let addr = format!("{}:{}", a.bind, a.port);
    let socket = UdpSocket::bind(&addr).map_err(|e| Failure(format!("bind {addr}: {e}")))?;
    socket.set_read_timeout(Some(Duration::from_millis(200)))?;
    // Only the first handler registration in a process succeeds.
    let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst));
    let mut buf = vec![0u8; crate::v2x::MAX_DATAGRAM];
    let mut decoded = 0u64;
    while !INTERRUPTED.load(Ordering::SeqCst) {
        if a.count.is_some_and(|n| decoded >= n) {
            break;
        }
        let (n, from) = match socket.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e)
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) =>
            {
                continue
            }
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        };
        let received_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64);
        match sdsm::decode(&buf[..n]) {
            Ok(msg) => {
                let line = serde_json::to_string(&ReceivedAlert {
                    received_unix_ms,
                    from: from.to_string(),
                    bytes: n,
                    message: &msg,
                })?;
                writeln!(stdout, "{line}")?;
                stdout.flush()?;
                decoded += 1;
            }
            Err(e) => {
                let _ = writeln!(
                    stderr,
                    "warning: skipped {n}-byte datagram from {from}: {e}"
                );
            }
        }
    }
    Ok(EXIT_OK)
}
