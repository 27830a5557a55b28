use serde::{Deserialize, Serialize};

/// Latitude limit in 1e-7 degree units.
pub const LAT_LIMIT: i32 = 900_000_000;
/// Longitude limit in 1e-7 degree units.
pub const LON_LIMIT: i32 = 1_800_000_000;
/// Heading is in 0.0125 degree units; 28800 is a full turn.
pub const HEADING_UNITS_PER_TURN: u16 = 28_800;
pub const MAX_CONFIDENCE_PCT: u8 = 100;
pub const MAX_MSG_COUNT: u8 = 127;
pub const MAX_OBJECTS: usize = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum ObjectType {
    Unknown = 0,
    Vehicle = 1,
    Vru = 2,
    Animal = 3,
}

impl ObjectType {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Unknown),
            1 => Some(Self::Vehicle),
            2 => Some(Self::Vru),
            3 => Some(Self::Animal),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

/// One detected object inside an SDSM.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectedObject {
    pub obj_type: ObjectType,
    pub obj_id: u16,
    /// Milliseconds before `sdsm_time_ms` at which the object was measured.
    pub time_offset_ms: u16,
    /// East offset from the reference position, 0.1 m units.
    pub pos_offset_x_dm: i16,
    /// North offset from the reference position, 0.1 m units.
    pub pos_offset_y_dm: i16,
    /// 0.02 m/s units.
    pub speed_units: u16,
    /// 0.0125 degree units clockwise from true north.
    pub heading_units: u16,
    pub confidence_pct: u8,
}

/// Sensor data sharing message: one sensing station's view of nearby objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDataSharingMessage {
    /// Rolling 0..=127 counter owned by the sender.
    pub msg_count: u8,
    pub source_id: u32,
    /// Measurement time, ms since the Unix epoch.
    pub sdsm_time_ms: u64,
    /// 1e-7 degree units.
    pub ref_lat: i32,
    /// 1e-7 degree units.
    pub ref_lon: i32,
    /// 0.1 m units.
    pub ref_elev_dm: i16,
    pub objects: Vec<DetectedObject>,
}

/// Identity used for relay deduplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MessageKey {
    pub source_id: u32,
    pub msg_count: u8,
    pub sdsm_time_ms: u64,
}

impl SensorDataSharingMessage {
    pub fn key(&self) -> MessageKey {
        MessageKey {
            source_id: self.source_id,
            msg_count: self.msg_count,
            sdsm_time_ms: self.sdsm_time_ms,
        }
    }

    /// First invariant violation as `(field path, offending value)`.
    pub fn violation(&self) -> Option<(String, i64)> {
        if self.msg_count > MAX_MSG_COUNT {
            return Some(("msg_count".into(), self.msg_count.into()));
        }
        if !(-LAT_LIMIT..=LAT_LIMIT).contains(&self.ref_lat) {
            return Some(("ref_lat".into(), self.ref_lat.into()));
        }
        if !(-LON_LIMIT..=LON_LIMIT).contains(&self.ref_lon) {
            return Some(("ref_lon".into(), self.ref_lon.into()));
        }
        let n = self.objects.len();
        if n == 0 || n > MAX_OBJECTS {
            return Some(("objects.len".into(), n as i64));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.heading_units >= HEADING_UNITS_PER_TURN {
                return Some((
                    format!("objects[{i}].heading_units"),
                    o.heading_units.into(),
                ));
            }
            if o.confidence_pct > MAX_CONFIDENCE_PCT {
                return Some((
                    format!("objects[{i}].confidence_pct"),
                    o.confidence_pct.into(),
                ));
            }
        }
        None
    }
}
