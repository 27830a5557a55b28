//! Track confirmation and the two warning decisions: warn the local driver,
//! and broadcast an SDSM once a track is confirmed.
//!
//! Detections are linked to tracks by greedy IoU association. Pairs are
//! visited in descending IoU order (ties: lower detection index, then lower
//! track id) and matched one-to-one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbox::{iou, BBox};
use crate::detection::Detection;

/// Driver-warning floor applied in hot-weather mode.
pub const HOT_WEATHER_DRIVER_CONF: f64 = 0.65;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub driver_warn_conf: f64,
    pub broadcast_conf: f64,
    pub confirm_frames: u32,
    pub assoc_iou: f64,
    pub max_age_frames: u32,
    pub hot_weather_mode: bool,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            driver_warn_conf: 0.50,
            broadcast_conf: 0.65,
            confirm_frames: 3,
            assoc_iou: 0.3,
            max_age_frames: 5,
            hot_weather_mode: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("{field} = {value} outside [0, 1]")]
    OutOfUnit { field: &'static str, value: f64 },
    #[error("effective driver_warn_conf {driver} exceeds broadcast_conf {broadcast}")]
    Ordering { driver: f64, broadcast: f64 },
    #[error("confirm_frames must be at least 1")]
    ConfirmFrames,
}

impl ThresholdConfig {
    pub fn effective_driver_warn_conf(&self) -> f64 {
        if self.hot_weather_mode {
            self.driver_warn_conf.max(HOT_WEATHER_DRIVER_CONF)
        } else {
            self.driver_warn_conf
        }
    }

    pub fn validate(&self) -> Result<(), ThresholdError> {
        for (field, value) in [
            ("driver_warn_conf", self.driver_warn_conf),
            ("broadcast_conf", self.broadcast_conf),
            ("assoc_iou", self.assoc_iou),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ThresholdError::OutOfUnit { field, value });
            }
        }
        let driver = self.effective_driver_warn_conf();
        if driver > self.broadcast_conf {
            return Err(ThresholdError::Ordering {
                driver,
                broadcast: self.broadcast_conf,
            });
        }
        if self.confirm_frames == 0 {
            return Err(ThresholdError::ConfirmFrames);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Track {
    pub track_id: u64,
    pub last_bbox: BBox,
    pub last_confidence: f64,
    /// Consecutive frames with an associated detection; 0 after a miss.
    pub consecutive_hits: u32,
    /// Frames since the last association.
    pub age_frames: u32,
    /// Running maximum of every associated confidence.
    pub peak_confidence: f64,
    pub broadcast_issued: bool,
    pub last_update_ms: u64,
    pub last_distance_ft: Option<f64>,
}

impl Track {
    fn spawn(track_id: u64, det: &Detection, now_ms: u64) -> Self {
        Self {
            track_id,
            last_bbox: det.bbox,
            last_confidence: det.confidence,
            consecutive_hits: 1,
            age_frames: 0,
            peak_confidence: det.confidence,
            broadcast_issued: false,
            last_update_ms: now_ms,
            last_distance_ft: det.est_distance_ft,
        }
    }

    fn absorb(&mut self, det: &Detection, now_ms: u64) {
        self.last_bbox = det.bbox;
        self.last_confidence = det.confidence;
        self.consecutive_hits += 1;
        self.age_frames = 0;
        self.peak_confidence = self.peak_confidence.max(det.confidence);
        self.last_update_ms = now_ms;
        if det.est_distance_ft.is_some() {
            self.last_distance_ft = det.est_distance_ft;
        }
    }

    /// Associated with a detection in the most recent update.
    pub fn is_fresh(&self) -> bool {
        self.age_frames == 0
    }

    /// Latches the broadcast flag. Returns false if it was already set.
    pub fn mark_broadcast(&mut self) -> bool {
        !std::mem::replace(&mut self.broadcast_issued, true)
    }
}

/// Greedy one-to-one association. Returns `(track_index, detection_index)`
/// pairs in the order they were matched.
pub fn associate(tracks: &[Track], detections: &[Detection], min_iou: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (di, det) in detections.iter().enumerate() {
        for (ti, trk) in tracks.iter().enumerate() {
            let score = iou(&trk.last_bbox, &det.bbox);
            if score > 0.0 && score >= min_iou {
                pairs.push((score, di, trk.track_id, ti));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut track_used = vec![false; tracks.len()];
    let mut det_used = vec![false; detections.len()];
    let mut out = Vec::new();
    for (_, di, _, ti) in pairs {
        if !track_used[ti] && !det_used[di] {
            track_used[ti] = true;
            det_used[di] = true;
            out.push((ti, di));
        }
    }
    out
}

/// Advances `tracks` by one frame of detections.
///
/// Matched tracks gain a hit, missed tracks age and lose their hit streak,
/// tracks older than `max_age_frames` are dropped, and leftover detections
/// start new tracks with ids drawn from `next_id`.
pub fn update_tracks(
    mut tracks: Vec<Track>,
    detections: &[Detection],
    now_ms: u64,
    cfg: &ThresholdConfig,
    next_id: &mut u64,
) -> Vec<Track> {
    let matches = associate(&tracks, detections, cfg.assoc_iou);
    let mut track_hit = vec![false; tracks.len()];
    let mut det_hit = vec![false; detections.len()];
    for &(ti, di) in &matches {
        tracks[ti].absorb(&detections[di], now_ms);
        track_hit[ti] = true;
        det_hit[di] = true;
    }
    for (trk, hit) in tracks.iter_mut().zip(&track_hit) {
        if !hit {
            trk.age_frames += 1;
            trk.consecutive_hits = 0;
        }
    }
    tracks.retain(|t| t.age_frames <= cfg.max_age_frames);
    for (det, _) in detections.iter().zip(&det_hit).filter(|(_, hit)| !**hit) {
        tracks.push(Track::spawn(*next_id, det, now_ms));
        *next_id += 1;
    }
    tracks
}

/// Owns a track set and its id counter.
#[derive(Clone, Debug)]
pub struct Tracker {
    tracks: Vec<Track>,
    next_id: u64,
    cfg: ThresholdConfig,
}

impl Tracker {
    pub fn new(cfg: ThresholdConfig) -> Self {
        Self {
            tracks: Vec::new(),
            next_id: 1,
            cfg,
        }
    }

    pub fn config(&self) -> &ThresholdConfig {
        &self.cfg
    }

    pub fn update(&mut self, detections: &[Detection], now_ms: u64) -> &mut [Track] {
        let tracks = std::mem::take(&mut self.tracks);
        self.tracks = update_tracks(tracks, detections, now_ms, &self.cfg, &mut self.next_id);
        &mut self.tracks
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn tracks_mut(&mut self) -> &mut [Track] {
        &mut self.tracks
    }
}

/// "Is deer detected?" for the local driver. Stateless; may fire on the
/// first frame of a track.
pub fn evaluate_driver_warning(track: &Track, cfg: &ThresholdConfig) -> bool {
    track.last_confidence >= cfg.effective_driver_warn_conf()
}

/// "Broadcast warning threshold met?" True at most once per track, provided
/// the caller latches `broadcast_issued` when it acts on the result.
pub fn evaluate_broadcast(track: &Track, cfg: &ThresholdConfig) -> bool {
    track.consecutive_hits >= cfg.confirm_frames
        && track.peak_confidence >= cfg.broadcast_conf
        && !track.broadcast_issued
}
