//! The frame loop.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{
    BroadcastEvent, DriverWarningEvent, LatencySummary, ReceiverAlert, SimReport, StageSources,
};
use super::scenario::{Scenario, TimingMode};
use super::timing::{check_budgets, FrameTiming, Stage, StageTimings};
use super::SimError;
use crate::bbox::MODEL_INPUT_SIZE;
use crate::detection::{preprocess, Detection, DetectorBackend, ThermalFrame, DEER_CLASS_ID};
use crate::sdsm::{self, SdsmBuilder, MAX_MSG_COUNT};
use crate::tracking::{evaluate_broadcast, evaluate_driver_warning, Tracker};
use crate::v2x::{AirMessage, DeliveryStats, ObuLink, RadioWorld, StationKind, StationNode};

const BACKGROUND_RAW: u16 = 2_900;
const HOT_RAW: u16 = 3_150;

/// A stand-in capture: a mild background gradient with a warm rectangle at
/// each detection box, mapped from model-input to sensor coordinates.
pub fn synthetic_frame(
    frame_id: u64,
    t_ms: u64,
    width: u32,
    height: u32,
    detections: &[Detection],
) -> ThermalFrame {
    let mut px: Vec<u16> = (0..height)
        .flat_map(|y| (0..width).map(move |x| BACKGROUND_RAW + ((x + y) % 16) as u16))
        .collect();
    let sx = f64::from(width) / f64::from(MODEL_INPUT_SIZE);
    let sy = f64::from(height) / f64::from(MODEL_INPUT_SIZE);
    for d in detections {
        let x0 = (d.bbox.x_min * sx).floor().max(0.0) as u32;
        let x1 = ((d.bbox.x_max * sx).ceil() as u32).min(width);
        let y0 = (d.bbox.y_min * sy).floor().max(0.0) as u32;
        let y1 = ((d.bbox.y_max * sy).ceil() as u32).min(height);
        let v = HOT_RAW + (d.confidence * 200.0).round() as u16;
        for y in y0..y1 {
            for x in x0..x1 {
                px[(y * width + x) as usize] = v;
            }
        }
    }
    ThermalFrame::new(frame_id, t_ms, width, height, px).expect("synthetic frame dimensions")
}

fn elapsed_us(start: Instant) -> u64 {
    (start.elapsed().as_micros() as u64).max(1)
}

struct Clock {
    mode: TimingMode,
    rng: ChaCha8Rng,
}

impl Clock {
    fn modeled(&mut self, stage: Stage) -> u64 {
        let (lo, hi) = stage.typical_us();
        self.rng.gen_range(lo..=hi)
    }

    /// Measured duration in measured mode, a modeled sample otherwise.
    fn real(&mut self, stage: Stage, start: Instant) -> u64 {
        match self.mode {
            TimingMode::Measured => elapsed_us(start),
            TimingMode::Modeled => self.modeled(stage),
        }
    }
}

/// Runs every frame tick of `scenario`.
///
/// Frame ids start at 1; frame `k` is captured at `(k - 1) * frame_period_ms`
/// after the epoch. Setup errors (radio world, OBU socket) are returned as
/// `Err`; a failure once frames are flowing stops the run and returns the
/// report so far with `complete = false`.
pub fn run(scenario: &Scenario) -> Result<SimReport, SimError> {
    let ego_id = scenario.ego_station_id;
    let first = scenario.ego_pose_at(0).position();
    let mut stations =
        vec![StationNode::new(ego_id, StationKind::Obu, first).with_range(scenario.ego_range_m)];
    stations.extend(scenario.stations.iter().cloned());
    let mut world = RadioWorld::new(stations, scenario.radio.clone())?;
    let link = match &scenario.obu_endpoint {
        Some(ep) => Some(ObuLink::connect(ep)?),
        None => None,
    };
    let mut timing_rng = ChaCha8Rng::seed_from_u64(scenario.radio.rng_seed);
    timing_rng.set_stream(1);
    let mut clock = Clock {
        mode: scenario.timing,
        rng: timing_rng,
    };
    let builder = SdsmBuilder {
        source_id: ego_id,
        offset: scenario.offset,
    };
    let mut tracker = Tracker::new(scenario.thresholds.clone());

    let mut report = SimReport {
        complete: true,
        error: None,
        seed: scenario.radio.rng_seed,
        timing_mode: scenario.timing,
        stage_sources: StageSources::for_mode(scenario.timing),
        frames: 0,
        detections_seen: 0,
        driver_warnings: 0,
        broadcasts: 0,
        sdsms_encoded: 0,
        datagrams_sent: 0,
        send_failures: 0,
        delivery: DeliveryStats::default(),
        latency: LatencySummary::default(),
        budget: Default::default(),
        warning_events: Vec::new(),
        broadcast_events: Vec::new(),
        receiver_alerts: Vec::new(),
        frame_timings: Vec::new(),
    };
    let mut msg_count: u8 = 0;

    for tick in 0..scenario.frame_count() {
        let frame_id = tick + 1;
        let t_ms = tick * scenario.frame_period_ms;
        let now_ms = scenario.epoch_ms + t_ms;
        let frame_start_us = t_ms * 1000;

        let capture_start = Instant::now();
        let frame = match &scenario.frames_dir {
            Some(dir) => {
                let path = dir.join(format!("frame_{frame_id:06}.raw"));
                match std::fs::File::open(&path)
                    .map_err(Into::into)
                    .and_then(|f| {
                        ThermalFrame::read_raw(std::io::BufReader::new(f), frame_id, t_ms)
                    }) {
                    Ok(f) => f,
                    Err(e) => {
                        report.complete = false;
                        report.error = Some(format!("frame {frame_id}: {}: {e}", path.display()));
                        break;
                    }
                }
            }
            None => synthetic_frame(
                frame_id,
                t_ms,
                scenario.sensor.width,
                scenario.sensor.height,
                &scenario.detector.lookup(frame_id).detections,
            ),
        };
        if let Err(e) = preprocess(&frame) {
            report.complete = false;
            report.error = Some(format!("frame {frame_id}: {e}"));
            break;
        }
        let capture_us = clock.real(Stage::Capture, capture_start);

        let out = scenario.detector.detect(&frame);
        let inference_us = (out.inference_ms * 1000.0).round() as u64;
        let deer: Vec<Detection> = out
            .detections
            .into_iter()
            .filter(|d| d.class_id == DEER_CLASS_ID)
            .collect();
        report.detections_seen += deer.len() as u64;

        let cfg = scenario.thresholds.clone();
        let tracks = tracker.update(&deer, now_ms);
        let mut warned = false;
        let mut to_broadcast = Vec::new();
        for t in tracks.iter_mut() {
            if t.is_fresh() && evaluate_driver_warning(t, &cfg) {
                warned = true;
                report.driver_warnings += 1;
                report.warning_events.push(DriverWarningEvent {
                    frame_id,
                    track_id: t.track_id,
                    confidence: t.last_confidence,
                });
            }
            if evaluate_broadcast(t, &cfg) && t.mark_broadcast() {
                to_broadcast.push(t.clone());
            }
        }

        let mut stages = [capture_us, inference_us, 0, 0, 0, 0];
        let mut alert_path = false;
        if !to_broadcast.is_empty() {
            let ego = scenario.ego_pose_at(t_ms);
            if let Err(e) = world.set_position(ego_id, ego.position()) {
                report.complete = false;
                report.error = Some(format!("frame {frame_id}: {e}"));
                break;
            }
            let gen_start = Instant::now();
            let mut encoded = Vec::with_capacity(to_broadcast.len());
            let mut failure = None;
            for track in &to_broadcast {
                let built = builder
                    .build(track, Some(&ego), now_ms, msg_count)
                    .map_err(|e| e.to_string())
                    .and_then(|m| sdsm::encode(&m).map(|b| (m, b)).map_err(|e| e.to_string()));
                match built {
                    Ok((m, bytes)) => {
                        msg_count = (msg_count + 1) % (MAX_MSG_COUNT + 1);
                        encoded.push((track.track_id, m, bytes));
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failure {
                report.complete = false;
                report.error = Some(format!("frame {frame_id}: {e}"));
                break;
            }
            stages[2] = clock.real(Stage::SdsmGen, gen_start);
            let tx_start_us = frame_start_us + stages[0] + stages[1] + stages[2];

            let mut rx_measured = 0;
            for (track_id, msg, bytes) in encoded {
                report.broadcasts += 1;
                report.sdsms_encoded += 1;
                if let Some(link) = &link {
                    match link.send(&bytes) {
                        Ok(_) => report.datagrams_sent += 1,
                        Err(_) => report.send_failures += 1,
                    }
                }
                let air = AirMessage {
                    key: msg.key(),
                    payload: bytes.clone(),
                    hop_count: 0,
                    origin_time_us: tx_start_us,
                };
                let outcome = match world.broadcast_with_relay(ego_id, &air, tx_start_us) {
                    Ok(o) => o,
                    Err(e) => {
                        report.complete = false;
                        report.error = Some(format!("frame {frame_id}: {e}"));
                        break;
                    }
                };
                stages[3] = stages[3].max(outcome.tx_latency_us);
                for d in outcome
                    .deliveries
                    .iter()
                    .filter(|d| d.kind == StationKind::Obu && d.first_copy)
                {
                    let rx_start = Instant::now();
                    let decoded = sdsm::decode(&bytes);
                    rx_measured = rx_measured.max(elapsed_us(rx_start));
                    let Ok(decoded) = decoded else { continue };
                    let obj = &decoded.objects[0];
                    alert_path = true;
                    report.receiver_alerts.push(ReceiverAlert {
                        frame_id,
                        station_id: d.station_id,
                        source_id: decoded.source_id,
                        msg_count: decoded.msg_count,
                        obj_id: obj.obj_id,
                        confidence_pct: obj.confidence_pct,
                        hop_count: d.hop_count,
                        arrival_us: d.arrival_us,
                        air_latency_us: d.arrival_us - tx_start_us,
                        roundtrip_ok: decoded == msg,
                    });
                }
                report.broadcast_events.push(BroadcastEvent {
                    frame_id,
                    track_id,
                    bytes: bytes.len(),
                    message: msg,
                });
            }
            if !report.complete {
                break;
            }
            if alert_path {
                stages[4] = match clock.mode {
                    TimingMode::Measured => rx_measured,
                    TimingMode::Modeled => clock.modeled(Stage::RxDecode),
                };
            }
        }
        if warned || alert_path {
            stages[5] = clock.modeled(Stage::Alert);
        }
        report.frames += 1;
        report.frame_timings.push(FrameTiming {
            frame_id,
            alert_path,
            timings: StageTimings::from_stages(stages),
        });
    }

    report.delivery = world.stats().clone();
    report.latency = LatencySummary::from_frames(&report.frame_timings, &report.delivery);
    report.budget = check_budgets(&report.frame_timings);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Scenario;
    use std::path::Path;

    fn scenario(log: &str) -> Scenario {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("log.jsonl"), log).unwrap();
        let text = r#"{"epoch_ms":1745500000000,"duration_ms":400,
            "ego":{"station_id":1001,"poses":[{"t_ms":0,"lat":35.8262,"lon":-82.5487,"elev_m":800}]},
            "stations":[{"station_id":2002,"kind":"obu","lat":35.8298,"lon":-82.5487}],
            "radio":{"in_range_delivery_prob":1.0},
            "detection_log":"log.jsonl"}"#;
        Scenario::parse(text, dir.path()).unwrap()
    }

    const DEER: &str = r#"{"bbox":[80,90,140,170],"conf":0.82,"est_distance_ft":55}"#;

    fn log(frames: &[u64]) -> String {
        frames
            .iter()
            .map(|f| {
                format!(
                    r#"{{"frame_id":{f},"t_ms":{},"detections":[{DEER}]}}"#,
                    (f - 1) * 40
                ) + "\n"
            })
            .collect()
    }

    #[test]
    fn empty_log_is_quiet() {
        let r = run(&scenario("")).unwrap();
        assert_eq!(r.frames, 10);
        assert_eq!((r.driver_warnings, r.broadcasts), (0, 0));
        assert_eq!(r.delivery, DeliveryStats::default());
        assert!(r.complete);
        assert!(r.frame_timings.iter().all(|f| f.timings.is_consistent()));
    }

    #[test]
    fn three_frames_broadcast_once() {
        let r = run(&scenario(&log(&[1, 2, 3]))).unwrap();
        assert_eq!(r.driver_warnings, 3);
        assert_eq!(r.broadcasts, 1);
        assert_eq!(r.broadcast_events[0].frame_id, 3);
        assert_eq!(r.receiver_alerts.len(), 1);
        let a = &r.receiver_alerts[0];
        assert_eq!((a.station_id, a.confidence_pct), (2002, 82));
        assert!(a.roundtrip_ok);
        assert!(r.frame_timings[2].alert_path);
        assert_eq!(
            r.broadcast_events[0].message.objects[0].pos_offset_y_dm,
            168
        );
    }

    #[test]
    fn repeat_runs_serialize_identically() {
        let s = scenario(&log(&[1, 2, 3, 4, 5, 8, 9, 10]));
        let a = serde_json::to_string(&run(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_frame_file_gives_partial_report() {
        let mut s = scenario(&log(&[1]));
        s.frames_dir = Some(Path::new("/nonexistent-frames").to_path_buf());
        let r = run(&s).unwrap();
        assert!(!r.complete);
        assert_eq!(r.frames, 0);
        assert!(r.error.unwrap().contains("frame_000001.raw"));
    }

    #[test]
    fn synthetic_frame_marks_box() {
        let det = Detection {
            frame_id: 1,
            bbox: crate::bbox::BBox::new(0.0, 0.0, 128.0, 128.0),
            confidence: 0.5,
            class_id: 0,
            est_distance_ft: None,
        };
        let f = synthetic_frame(1, 0, 256, 192, &[det]);
        assert_eq!(f.pixels()[0], HOT_RAW + 100);
        assert_eq!(
            f.pixels()[96 * 256 + 128],
            BACKGROUND_RAW + ((128 + 96) % 16) as u16
        );
    }
}
