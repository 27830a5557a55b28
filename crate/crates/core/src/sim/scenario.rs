//! Scenario files: JSON describing the ego vehicle, the other stations, the
//! radio and threshold configuration and the detection log to replay.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::detection::{ReplayDetector, SENSOR_HEIGHT, SENSOR_WIDTH};
use crate::geo::LatLon;
use crate::sdsm::{EgoPose, OffsetModel};
use crate::tracking::ThresholdConfig;
use crate::v2x::{RadioModel, StationKind, StationNode, DEFAULT_RANGE_M};

pub const DEFAULT_FRAME_PERIOD_MS: u64 = 40;
pub const DEFAULT_EGO_STATION_ID: u32 = 1;

/// How stage latencies are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingMode {
    /// Every non-replayed stage is drawn from its typical window with a
    /// seeded generator. Reports are reproducible bit for bit.
    #[default]
    Modeled,
    /// Capture/preprocess, SDSM generation and receive decode are timed with
    /// the monotonic clock; the rest stay modeled.
    Measured,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSample {
    pub t_ms: u64,
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub elev_m: f64,
    #[serde(default)]
    pub heading_deg: f64,
    #[serde(default)]
    pub speed_mps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    #[serde(default = "default_ego_id")]
    pub station_id: u32,
    #[serde(default = "default_range")]
    pub range_m: f64,
    pub poses: Vec<PoseSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSpec {
    pub station_id: u32,
    pub kind: StationKind,
    pub lat: f64,
    pub lon: f64,
    #[serde(default = "default_range")]
    pub range_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub width: u32,
    pub height: u32,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            width: SENSOR_WIDTH,
            height: SENSOR_HEIGHT,
        }
    }
}

fn default_ego_id() -> u32 {
    DEFAULT_EGO_STATION_ID
}

fn default_range() -> f64 {
    DEFAULT_RANGE_M
}

fn default_period() -> u64 {
    DEFAULT_FRAME_PERIOD_MS
}

/// On-disk scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Unix ms of simulation time zero.
    #[serde(default)]
    pub epoch_ms: u64,
    #[serde(default = "default_period")]
    pub frame_period_ms: u64,
    pub duration_ms: u64,
    pub ego: EgoSpec,
    #[serde(default)]
    pub stations: Vec<StationSpec>,
    #[serde(default)]
    pub radio: RadioModel,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    /// Replay log, relative to the scenario file.
    #[serde(default)]
    pub detection_log: Option<PathBuf>,
    /// Directory of `frame_NNNNNN.raw` captures; synthetic frames otherwise.
    #[serde(default)]
    pub frames_dir: Option<PathBuf>,
    #[serde(default)]
    pub obu_endpoint: Option<String>,
    #[serde(default)]
    pub offset: OffsetModel,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub timing: TimingMode,
}

/// A loaded, checked scenario ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub epoch_ms: u64,
    pub frame_period_ms: u64,
    pub duration_ms: u64,
    pub ego_station_id: u32,
    pub ego_range_m: f64,
    pub ego_poses: Vec<PoseSample>,
    pub stations: Vec<StationNode>,
    pub radio: RadioModel,
    pub thresholds: ThresholdConfig,
    pub detection_log: Option<PathBuf>,
    pub detector: ReplayDetector,
    pub frames_dir: Option<PathBuf>,
    pub obu_endpoint: Option<String>,
    pub offset: OffsetModel,
    pub sensor: SensorSpec,
    pub timing: TimingMode,
}

impl Scenario {
    /// Resolves a parsed document. Relative paths are taken against `base`.
    pub fn from_file(doc: ScenarioFile, base: &Path) -> Result<Self, ScenarioError> {
        let invariant = |m: String| Err(ScenarioError::Invariant(m));
        if doc.frame_period_ms == 0 {
            return invariant("frame_period_ms must be > 0".into());
        }
        if doc.ego.poses.is_empty() {
            return invariant("ego.poses must not be empty".into());
        }
        for (i, w) in doc.ego.poses.windows(2).enumerate() {
            if w[1].t_ms <= w[0].t_ms {
                return invariant(format!(
                    "ego.poses[{}].t_ms {} not strictly after {}",
                    i + 1,
                    w[1].t_ms,
                    w[0].t_ms
                ));
            }
        }
        for (i, p) in doc.ego.poses.iter().enumerate() {
            if !LatLon::new(p.lat, p.lon).is_valid() || !p.heading_deg.is_finite() {
                return invariant(format!("ego.poses[{i}] has invalid coordinates"));
            }
        }
        if doc.sensor.width == 0 || doc.sensor.height == 0 {
            return invariant("sensor dimensions must be positive".into());
        }
        if doc.ego.range_m.is_nan() || doc.ego.range_m <= 0.0 {
            return invariant("ego.range_m must be positive".into());
        }
        doc.thresholds
            .validate()
            .map_err(|e| ScenarioError::Invariant(format!("thresholds: {e}")))?;
        doc.radio
            .validate()
            .map_err(|e| ScenarioError::Invariant(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::from([doc.ego.station_id]);
        let mut stations = Vec::with_capacity(doc.stations.len());
        for (i, s) in doc.stations.iter().enumerate() {
            if !seen.insert(s.station_id) {
                return invariant(format!(
                    "stations[{i}]: duplicate station_id {}",
                    s.station_id
                ));
            }
            let pos = LatLon::new(s.lat, s.lon);
            if !pos.is_valid() {
                return invariant(format!("stations[{i}] has invalid coordinates"));
            }
            if s.range_m.is_nan() || s.range_m <= 0.0 {
                return invariant(format!("stations[{i}].range_m must be positive"));
            }
            stations.push(StationNode::new(s.station_id, s.kind, pos).with_range(s.range_m));
        }
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        let detection_log = doc.detection_log.as_ref().map(resolve);
        let detector = match &detection_log {
            Some(path) => {
                if !path.is_file() {
                    return Err(ScenarioError::MissingFile(path.clone()));
                }
                ReplayDetector::from_path(path)?
            }
            None => ReplayDetector::new(Vec::new()),
        };
        let frames_dir = doc.frames_dir.as_ref().map(resolve);
        if let Some(dir) = &frames_dir {
            if !dir.is_dir() {
                return Err(ScenarioError::MissingFile(dir.clone()));
            }
        }
        Ok(Self {
            epoch_ms: doc.epoch_ms,
            frame_period_ms: doc.frame_period_ms,
            duration_ms: doc.duration_ms,
            ego_station_id: doc.ego.station_id,
            ego_range_m: doc.ego.range_m,
            ego_poses: doc.ego.poses,
            stations,
            radio: doc.radio,
            thresholds: doc.thresholds,
            detection_log,
            detector,
            frames_dir,
            obu_endpoint: doc.obu_endpoint,
            offset: doc.offset,
            sensor: doc.sensor,
            timing: doc.timing,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ScenarioError> {
        let doc: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Self::from_file(doc, base)
    }

    /// Number of frame ticks: `floor(duration / period)`.
    pub fn frame_count(&self) -> u64 {
        self.duration_ms / self.frame_period_ms
    }

    /// Ego pose at `t_ms` after the epoch. Position, elevation and speed are
    /// interpolated linearly between samples; heading is held from the
    /// earlier sample. Clamped to the first and last samples.
    pub fn ego_pose_at(&self, t_ms: u64) -> EgoPose {
        let poses = &self.ego_poses;
        let to_pose = |p: &PoseSample| EgoPose {
            lat: p.lat,
            lon: p.lon,
            elev_m: p.elev_m,
            heading_deg: p.heading_deg,
            speed_mps: p.speed_mps,
        };
        let next = poses.partition_point(|p| p.t_ms <= t_ms);
        if next == 0 {
            return to_pose(&poses[0]);
        }
        if next == poses.len() {
            return to_pose(&poses[poses.len() - 1]);
        }
        let (a, b) = (&poses[next - 1], &poses[next]);
        let s = (t_ms - a.t_ms) as f64 / (b.t_ms - a.t_ms) as f64;
        let lerp = |x: f64, y: f64| x + (y - x) * s;
        EgoPose {
            lat: lerp(a.lat, b.lat),
            lon: lerp(a.lon, b.lon),
            elev_m: lerp(a.elev_m, b.elev_m),
            heading_deg: a.heading_deg,
            speed_mps: lerp(a.speed_mps, b.speed_mps),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Scenario::parse(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"duration_ms":40,"ego":{"poses":[{"t_ms":0,"lat":35.8262,"lon":-82.5487}]}}"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = Scenario::parse(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(s.frame_period_ms, 40);
        assert_eq!(s.frame_count(), 1);
        assert_eq!(s.ego_station_id, 1);
        assert_eq!(s.radio, RadioModel::default());
        assert_eq!(s.thresholds, ThresholdConfig::default());
        assert_eq!(s.timing, TimingMode::Modeled);
        assert!(s.stations.is_empty());
        assert!(s.detector.is_empty());
    }

    #[test]
    fn zero_frame_period_is_invariant_error() {
        let text = MINIMAL.replace(
            "\"duration_ms\":40",
            "\"duration_ms\":40,\"frame_period_ms\":0",
        );
        match Scenario::parse(&text, Path::new(".")) {
            Err(ScenarioError::Invariant(m)) => assert!(m.contains("frame_period_ms")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position_and_field() {
        let text = "{\n  \"duration_ms\": 40,\n  \"ego\": {\"poses\": []},\n  \"bogus\": 1\n}";
        match Scenario::parse(text, Path::new(".")) {
            Err(ScenarioError::Parse { line, msg, .. }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("bogus"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn poses_must_increase_and_files_must_exist() {
        let text = r#"{"duration_ms":40,"ego":{"poses":[{"t_ms":10,"lat":0,"lon":0},{"t_ms":10,"lat":0,"lon":0}]}}"#;
        assert!(matches!(
            Scenario::parse(text, Path::new(".")),
            Err(ScenarioError::Invariant(_))
        ));
        let text = MINIMAL.replace(
            "\"duration_ms\":40",
            "\"duration_ms\":40,\"detection_log\":\"nope.jsonl\"",
        );
        assert!(matches!(
            Scenario::parse(&text, Path::new("/nonexistent")),
            Err(ScenarioError::MissingFile(_))
        ));
    }

    #[test]
    fn pose_interpolation() {
        let text = r#"{"duration_ms":400,"ego":{"poses":[
            {"t_ms":0,"lat":35.0,"lon":-82.0,"heading_deg":10,"speed_mps":0},
            {"t_ms":100,"lat":35.001,"lon":-82.0,"heading_deg":20,"speed_mps":10}]}}"#;
        let s = Scenario::parse(text, Path::new(".")).unwrap();
        let p = s.ego_pose_at(50);
        assert!((p.lat - 35.0005).abs() < 1e-12);
        assert_eq!(p.heading_deg, 10.0);
        assert_eq!(p.speed_mps, 5.0);
        assert_eq!(s.ego_pose_at(500).lat, 35.001);
        assert_eq!(s.ego_pose_at(100).heading_deg, 20.0);
    }
}
