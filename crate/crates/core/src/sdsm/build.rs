//! Turning a confirmed track into an SDSM.

use serde::{Deserialize, Serialize};

use super::message::{DetectedObject, ObjectType, SensorDataSharingMessage, MAX_MSG_COUNT};
use super::BuildError;
use crate::bbox::MODEL_INPUT_SIZE;
use crate::geo::{east_north, LatLon};
use crate::tracking::Track;

pub const DM_PER_FOOT: f64 = 3.048;

/// Position, elevation and motion of the sensing vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub elev_m: f64,
    #[serde(default)]
    pub heading_deg: f64,
    #[serde(default)]
    pub speed_mps: f64,
}

impl EgoPose {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

/// How a detection's range is projected into an east/north offset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OffsetModel {
    /// Straight ahead along the ego heading.
    #[default]
    AlongHeading,
    /// Bearing shifted by the bbox center's horizontal position across a
    /// camera with the given horizontal field of view.
    CameraAxis { hfov_deg: f64 },
}

impl OffsetModel {
    fn bearing_deg(&self, ego_heading_deg: f64, track: &Track) -> f64 {
        match *self {
            OffsetModel::AlongHeading => ego_heading_deg,
            OffsetModel::CameraAxis { hfov_deg } => {
                let (cx, _) = track.last_bbox.center();
                ego_heading_deg + hfov_deg * (cx / f64::from(MODEL_INPUT_SIZE) - 0.5)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdsmBuilder {
    pub source_id: u32,
    #[serde(default)]
    pub offset: OffsetModel,
}

impl SdsmBuilder {
    pub fn new(source_id: u32) -> Self {
        Self {
            source_id,
            offset: OffsetModel::AlongHeading,
        }
    }

    /// One-object animal SDSM for `track`, referenced to the ego position.
    /// `now_ms` is Unix time and must use the same clock as
    /// `track.last_update_ms`.
    pub fn build(
        &self,
        track: &Track,
        ego: Option<&EgoPose>,
        now_ms: u64,
        msg_count: u8,
    ) -> Result<SensorDataSharingMessage, BuildError> {
        let ego = ego.ok_or(BuildError::MissingEgoPose)?;
        if !ego.position().is_valid() || !ego.elev_m.is_finite() || !ego.heading_deg.is_finite() {
            return Err(BuildError::InvalidEgoPose(format!("{ego:?}")));
        }
        if msg_count > MAX_MSG_COUNT {
            return Err(BuildError::MsgCount(msg_count));
        }
        let (x_dm, y_dm) = match track.last_distance_ft {
            Some(ft) => {
                let bearing = self.offset.bearing_deg(ego.heading_deg, track);
                let (e, n) = east_north(bearing, ft * DM_PER_FOOT);
                (clamp_i16(e.round()), clamp_i16(n.round()))
            }
            None => (0, 0),
        };
        let elev_dm = clamp_i16((ego.elev_m * 10.0).round());
        let time_offset = now_ms
            .saturating_sub(track.last_update_ms)
            .min(u64::from(u16::MAX));
        Ok(SensorDataSharingMessage {
            msg_count,
            source_id: self.source_id,
            sdsm_time_ms: now_ms,
            ref_lat: (ego.lat * 1e7).round() as i32,
            ref_lon: (ego.lon * 1e7).round() as i32,
            ref_elev_dm: elev_dm,
            objects: vec![DetectedObject {
                obj_type: ObjectType::Animal,
                obj_id: (track.track_id % 65_536) as u16,
                time_offset_ms: time_offset as u16,
                pos_offset_x_dm: x_dm,
                pos_offset_y_dm: y_dm,
                // Deer speed and heading are not measured.
                speed_units: 0,
                heading_units: 0,
                confidence_pct: (track.peak_confidence.clamp(0.0, 1.0) * 100.0).round() as u8,
            }],
        })
    }
}

fn clamp_i16(v: f64) -> i16 {
    v.clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
}
