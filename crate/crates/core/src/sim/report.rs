//! The simulation report and its text summary.

use std::fmt::Write as _;

use serde::Serialize;

use super::scenario::TimingMode;
use super::timing::{end_to_end_totals, BudgetReport, FrameTiming, LatencyStats, Stage};
use crate::sdsm::SensorDataSharingMessage;
use crate::v2x::DeliveryStats;

/// Where a stage's numbers came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageSource {
    /// Drawn uniformly from the stage's typical window.
    Modeled,
    /// Monotonic clock around the real code path.
    Measured,
    /// Latency recorded alongside the replayed detections.
    ReplayLog,
    /// Air latency sampled by the radio model.
    RadioModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StageSources {
    pub capture: StageSource,
    pub inference: StageSource,
    pub sdsm_gen: StageSource,
    pub v2x_tx: StageSource,
    pub rx_decode: StageSource,
    pub alert: StageSource,
}

impl StageSources {
    pub fn for_mode(mode: TimingMode) -> Self {
        let real = match mode {
            TimingMode::Modeled => StageSource::Modeled,
            TimingMode::Measured => StageSource::Measured,
        };
        Self {
            capture: real,
            inference: StageSource::ReplayLog,
            sdsm_gen: real,
            v2x_tx: StageSource::RadioModel,
            rx_decode: real,
            alert: StageSource::Modeled,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriverWarningEvent {
    pub frame_id: u64,
    pub track_id: u64,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BroadcastEvent {
    pub frame_id: u64,
    pub track_id: u64,
    pub bytes: usize,
    pub message: SensorDataSharingMessage,
}

/// A receiving OBU decoding a broadcast for the first time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceiverAlert {
    pub frame_id: u64,
    pub station_id: u32,
    pub source_id: u32,
    pub msg_count: u8,
    pub obj_id: u16,
    pub confidence_pct: u8,
    pub hop_count: u8,
    /// Simulation time of arrival, microseconds from the first frame.
    pub arrival_us: u64,
    pub air_latency_us: u64,
    /// Decoded message equals the one that was encoded.
    pub roundtrip_ok: bool,
}

/// Latency distributions. Each stage covers only the frames in which it
/// ran; `total` covers every frame, `end_to_end` the frames whose broadcast
/// reached a receiver (or every frame if none did).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatencySummary {
    pub capture: Option<LatencyStats>,
    pub inference: Option<LatencyStats>,
    pub sdsm_gen: Option<LatencyStats>,
    pub v2x_tx: Option<LatencyStats>,
    pub rx_decode: Option<LatencyStats>,
    pub alert: Option<LatencyStats>,
    pub total: Option<LatencyStats>,
    pub end_to_end: Option<LatencyStats>,
    pub air_delivery: Option<LatencyStats>,
}

impl LatencySummary {
    pub fn from_frames(frames: &[FrameTiming], delivery: &DeliveryStats) -> Self {
        let stage = |s: Stage| {
            let v: Vec<u64> = frames
                .iter()
                .map(|f| f.timings.get(s))
                .filter(|&v| v > 0)
                .collect();
            LatencyStats::from_samples(&v)
        };
        let totals: Vec<u64> = frames.iter().map(|f| f.timings.total_us).collect();
        Self {
            capture: stage(Stage::Capture),
            inference: stage(Stage::Inference),
            sdsm_gen: stage(Stage::SdsmGen),
            v2x_tx: stage(Stage::V2xTx),
            rx_decode: stage(Stage::RxDecode),
            alert: stage(Stage::Alert),
            total: LatencyStats::from_samples(&totals),
            end_to_end: LatencyStats::from_samples(&end_to_end_totals(frames)),
            air_delivery: LatencyStats::from_samples(&delivery.latency_samples_us),
        }
    }

    pub fn stage(&self, s: Stage) -> Option<LatencyStats> {
        match s {
            Stage::Capture => self.capture,
            Stage::Inference => self.inference,
            Stage::SdsmGen => self.sdsm_gen,
            Stage::V2xTx => self.v2x_tx,
            Stage::RxDecode => self.rx_decode,
            Stage::Alert => self.alert,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    /// False when the run stopped early; `error` says why.
    pub complete: bool,
    pub error: Option<String>,
    pub seed: u64,
    pub timing_mode: TimingMode,
    pub stage_sources: StageSources,
    pub frames: u64,
    pub detections_seen: u64,
    pub driver_warnings: u64,
    pub broadcasts: u64,
    pub sdsms_encoded: u64,
    pub datagrams_sent: u64,
    pub send_failures: u64,
    pub delivery: DeliveryStats,
    pub latency: LatencySummary,
    pub budget: BudgetReport,
    pub warning_events: Vec<DriverWarningEvent>,
    pub broadcast_events: Vec<BroadcastEvent>,
    pub receiver_alerts: Vec<ReceiverAlert>,
    pub frame_timings: Vec<FrameTiming>,
}

fn ms(us: u64) -> String {
    format!("{}.{:03}", us / 1000, us % 1000)
}

/// Human-readable summary table.
pub fn render_summary(r: &SimReport) -> String {
    let mut out = String::new();
    let status = if r.complete { "complete" } else { "INCOMPLETE" };
    let _ = writeln!(
        out,
        "simulation {status} (seed {}, {} frames)",
        r.seed, r.frames
    );
    if let Some(e) = &r.error {
        let _ = writeln!(out, "error: {e}");
    }
    let _ = writeln!(
        out,
        "detections {}  driver warnings {}  broadcasts {}  receiver alerts {}",
        r.detections_seen,
        r.driver_warnings,
        r.broadcasts,
        r.receiver_alerts.len()
    );
    let d = &r.delivery;
    let _ = writeln!(
        out,
        "radio: sent {}  delivered {}  relayed {}  duplicates suppressed {}",
        d.sent, d.delivered, d.relayed, d.duplicates_suppressed
    );
    let _ = writeln!(
        out,
        "{:<12} {:<11} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "stage", "source", "n", "min ms", "median", "p95", "max", "limit"
    );
    let src = |s: StageSource| match s {
        StageSource::Modeled => "modeled",
        StageSource::Measured => "measured",
        StageSource::ReplayLog => "replay_log",
        StageSource::RadioModel => "radio",
    };
    let sources = [
        r.stage_sources.capture,
        r.stage_sources.inference,
        r.stage_sources.sdsm_gen,
        r.stage_sources.v2x_tx,
        r.stage_sources.rx_decode,
        r.stage_sources.alert,
    ];
    let mut row = |name: &str, source: &str, st: Option<LatencyStats>, limit: u64| match st {
        Some(s) => {
            let _ = writeln!(
                out,
                "{:<12} {:<11} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
                name,
                source,
                s.count,
                ms(s.min_us),
                ms(s.median_us),
                ms(s.p95_us),
                ms(s.max_us),
                ms(limit)
            );
        }
        None => {
            let _ = writeln!(out, "{name:<12} {source:<11} {:>5}", 0);
        }
    };
    for (stage, source) in Stage::ALL.into_iter().zip(sources) {
        row(
            stage.name(),
            src(source),
            r.latency.stage(stage),
            stage.max_us(),
        );
    }
    row("total", "", r.latency.total, super::TOTAL_MAX_US);
    row("end_to_end", "", r.latency.end_to_end, super::TOTAL_MAX_US);
    let median = r
        .budget
        .median_total_us
        .map_or_else(|| "n/a".to_string(), |m| format!("{} ms", ms(m)));
    let _ = writeln!(
        out,
        "median end-to-end {median} ({} the {} ms target); budget violations: {}",
        if r.budget.median_under_target {
            "under"
        } else {
            "not under"
        },
        super::TOTAL_TARGET_US / 1000,
        r.budget.violations.len()
    );
    out
}
