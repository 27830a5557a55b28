//! Sensor data sharing messages: construction from confirmed tracks and a
//! bit-exact binary codec.
//!
//! | field           | bits | notes                        |
//! |-----------------|------|------------------------------|
//! | msg_count       | 7    | rolling counter              |
//! | source_id       | 32   |                              |
//! | sdsm_time_ms    | 64   | Unix ms                      |
//! | ref_lat         | 31   | signed, 1e-7 deg             |
//! | ref_lon         | 32   | signed, 1e-7 deg             |
//! | ref_elev_dm     | 16   | signed, 0.1 m                |
//! | object_count    | 8    | 1..=255                      |
//! | per object:     |      |                              |
//! | obj_type        | 4    | 0 unknown .. 3 animal        |
//! | obj_id          | 16   |                              |
//! | time_offset_ms  | 16   |                              |
//! | pos_offset_x_dm | 16   | signed, east                 |
//! | pos_offset_y_dm | 16   | signed, north                |
//! | speed_units     | 16   | 0.02 m/s                     |
//! | heading_units   | 16   | 0.0125 deg, < 28800          |
//! | confidence_pct  | 7    | 0..=100                      |
//!
//! A message occupies `190 + 107 * n` bits, zero-padded to whole bytes.

mod bits;
mod build;
mod codec;
mod dump;
mod message;

pub use build::{EgoPose, OffsetModel, SdsmBuilder, DM_PER_FOOT};
pub use codec::{
    data_bits, decode, encode, encoded_len, FieldSpec, HEADER_BITS, HEADER_FIELDS, OBJECT_BITS,
    OBJECT_FIELDS,
};
pub use dump::dump;
pub use message::{
    DetectedObject, MessageKey, ObjectType, SensorDataSharingMessage, HEADING_UNITS_PER_TURN,
    LAT_LIMIT, LON_LIMIT, MAX_CONFIDENCE_PCT, MAX_MSG_COUNT, MAX_OBJECTS,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("encode: field {field} out of range: {value}")]
    Range { field: String, value: i64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("truncated: expected {expected_bits} bits, got {actual_bits}")]
    Truncated {
        expected_bits: usize,
        actual_bits: usize,
    },
    #[error("trailing bytes: expected {expected_bytes} bytes, got {actual_bytes}")]
    TrailingBytes {
        expected_bytes: usize,
        actual_bytes: usize,
    },
    #[error("nonzero padding after bit {bit_offset}")]
    Padding { bit_offset: usize },
    #[error("semantic: field {field} has invalid value {value}")]
    Semantic { field: String, value: i64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("configuration: no ego pose available")]
    MissingEgoPose,
    #[error("configuration: invalid ego pose {0}")]
    InvalidEgoPose(String),
    #[error("msg_count {0} exceeds 127")]
    MsgCount(u8),
}
