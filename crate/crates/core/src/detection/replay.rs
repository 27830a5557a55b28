//! Detector contract and the replay backend that serves recorded detections.
//!
//! A replay log is JSON Lines, one frame per line:
//!
//! ```text
//! {"frame_id":12,"t_ms":480,"inference_ms":44.0,"detections":[{"bbox":[80,90,140,170],"conf":0.82,"class_id":0,"est_distance_ft":55.0}]}
//! ```

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ReplayError, ThermalFrame};
use crate::bbox::BBox;

/// Inference latency reported for frames the log does not cover.
pub const DEFAULT_INFERENCE_MS: f64 = 45.0;

/// Class id of deer in single-class mode.
pub const DEER_CLASS_ID: u32 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_id: u64,
    pub bbox: BBox,
    pub confidence: f64,
    pub class_id: u32,
    pub est_distance_ft: Option<f64>,
}

impl Detection {
    pub fn is_valid(&self) -> bool {
        self.bbox.is_within_model_input() && (0.0..=1.0).contains(&self.confidence)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorOutput {
    pub detections: Vec<Detection>,
    pub inference_ms: f64,
}

/// Anything that turns a thermal frame into detections. Implementations
/// must be deterministic for a fixed backend state and frame.
pub trait DetectorBackend {
    fn detect(&self, frame: &ThermalFrame) -> DetectorOutput;
}

/// One detection as stored in the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogDetection {
    pub bbox: BBox,
    pub conf: f64,
    #[serde(default)]
    pub class_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub est_distance_ft: Option<f64>,
}

/// One line of the replay log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayRecord {
    pub frame_id: u64,
    pub t_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference_ms: Option<f64>,
    #[serde(default)]
    pub detections: Vec<LogDetection>,
}

#[derive(Clone, Debug, Default)]
pub struct ReplayDetector {
    records: BTreeMap<u64, ReplayRecord>,
    default_inference_ms: f64,
}

impl ReplayDetector {
    pub fn new(records: impl IntoIterator<Item = ReplayRecord>) -> Self {
        Self {
            records: records.into_iter().map(|r| (r.frame_id, r)).collect(),
            default_inference_ms: DEFAULT_INFERENCE_MS,
        }
    }

    pub fn with_default_inference_ms(mut self, ms: f64) -> Self {
        self.default_inference_ms = ms;
        self
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, ReplayError> {
        let mut records = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ReplayRecord =
                serde_json::from_str(&line).map_err(|e| ReplayError::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
            validate_record(&rec).map_err(|msg| ReplayError::Parse { line: line_no, msg })?;
            let id = rec.frame_id;
            if records.insert(id, rec).is_some() {
                return Err(ReplayError::Parse {
                    line: line_no,
                    msg: format!("duplicate frame_id {id}"),
                });
            }
        }
        Ok(Self {
            records,
            default_inference_ms: DEFAULT_INFERENCE_MS,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ReplayError> {
        let f = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    pub fn records(&self) -> impl Iterator<Item = &ReplayRecord> {
        self.records.values()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Logged output for `frame_id`, or nothing with the default latency.
    pub fn lookup(&self, frame_id: u64) -> DetectorOutput {
        match self.records.get(&frame_id) {
            Some(rec) => DetectorOutput {
                detections: rec
                    .detections
                    .iter()
                    .map(|d| Detection {
                        frame_id,
                        bbox: d.bbox,
                        confidence: d.conf,
                        class_id: d.class_id,
                        est_distance_ft: d.est_distance_ft,
                    })
                    .collect(),
                inference_ms: rec.inference_ms.unwrap_or(self.default_inference_ms),
            },
            None => DetectorOutput {
                detections: Vec::new(),
                inference_ms: self.default_inference_ms,
            },
        }
    }
}

impl DetectorBackend for ReplayDetector {
    fn detect(&self, frame: &ThermalFrame) -> DetectorOutput {
        self.lookup(frame.frame_id)
    }
}

fn validate_record(rec: &ReplayRecord) -> Result<(), String> {
    if let Some(ms) = rec.inference_ms {
        if !ms.is_finite() || ms < 0.0 {
            return Err(format!("inference_ms {ms} must be a non-negative number"));
        }
    }
    for (i, d) in rec.detections.iter().enumerate() {
        if !d.bbox.is_within_model_input() {
            return Err(format!(
                "detection {i}: bbox {:?} is not a well-formed box inside [0,256]^2",
                <[f64; 4]>::from(d.bbox)
            ));
        }
        if !(0.0..=1.0).contains(&d.conf) {
            return Err(format!("detection {i}: conf {} outside [0,1]", d.conf));
        }
        if let Some(dist) = d.est_distance_ft {
            if !dist.is_finite() || dist < 0.0 {
                return Err(format!("detection {i}: est_distance_ft {dist} invalid"));
            }
        }
    }
    Ok(())
}
