//! Fixed-width bit-packed SDSM wire format.
//!
//! Fields are written most significant bit first, signed fields in two's
//! complement within their width, and the message is zero-padded to a byte
//! boundary. See [`HEADER_FIELDS`] and [`OBJECT_FIELDS`] for the layout.

use super::bits::{BitReader, BitWriter};
use super::message::{DetectedObject, ObjectType, SensorDataSharingMessage};
use super::{DecodeError, EncodeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: &'static str,
    pub bits: u32,
    pub signed: bool,
}

const fn field(name: &'static str, bits: u32, signed: bool) -> FieldSpec {
    FieldSpec { name, bits, signed }
}

pub const HEADER_FIELDS: [FieldSpec; 7] = [
    field("msg_count", 7, false),
    field("source_id", 32, false),
    field("sdsm_time_ms", 64, false),
    field("ref_lat", 31, true),
    field("ref_lon", 32, true),
    field("ref_elev_dm", 16, true),
    field("object_count", 8, false),
];

pub const OBJECT_FIELDS: [FieldSpec; 8] = [
    field("obj_type", 4, false),
    field("obj_id", 16, false),
    field("time_offset_ms", 16, false),
    field("pos_offset_x_dm", 16, true),
    field("pos_offset_y_dm", 16, true),
    field("speed_units", 16, false),
    field("heading_units", 16, false),
    field("confidence_pct", 7, false),
];

const fn sum_bits(fields: &[FieldSpec]) -> usize {
    let mut i = 0;
    let mut total = 0;
    while i < fields.len() {
        total += fields[i].bits as usize;
        i += 1;
    }
    total
}

pub const HEADER_BITS: usize = sum_bits(&HEADER_FIELDS);
pub const OBJECT_BITS: usize = sum_bits(&OBJECT_FIELDS);

const _: () = assert!(HEADER_BITS == 190 && OBJECT_BITS == 107);

/// Data bits (excluding padding) for a message with `objects` objects.
pub const fn data_bits(objects: usize) -> usize {
    HEADER_BITS + OBJECT_BITS * objects
}

/// Encoded length in bytes for a message with `objects` objects.
pub const fn encoded_len(objects: usize) -> usize {
    data_bits(objects).div_ceil(8)
}

pub fn encode(msg: &SensorDataSharingMessage) -> Result<Vec<u8>, EncodeError> {
    if let Some((field, value)) = msg.violation() {
        return Err(EncodeError::Range { field, value });
    }
    let mut w = BitWriter::with_capacity_bits(data_bits(msg.objects.len()));
    w.put(msg.msg_count.into(), 7);
    w.put(msg.source_id.into(), 32);
    w.put(msg.sdsm_time_ms, 64);
    w.put_signed(msg.ref_lat.into(), 31);
    w.put_signed(msg.ref_lon.into(), 32);
    w.put_signed(msg.ref_elev_dm.into(), 16);
    w.put(msg.objects.len() as u64, 8);
    for o in &msg.objects {
        w.put(o.obj_type.code().into(), 4);
        w.put(o.obj_id.into(), 16);
        w.put(o.time_offset_ms.into(), 16);
        w.put_signed(o.pos_offset_x_dm.into(), 16);
        w.put_signed(o.pos_offset_y_dm.into(), 16);
        w.put(o.speed_units.into(), 16);
        w.put(o.heading_units.into(), 16);
        w.put(o.confidence_pct.into(), 7);
    }
    debug_assert_eq!(w.bit_len(), data_bits(msg.objects.len()));
    Ok(w.finish())
}

pub fn decode(bytes: &[u8]) -> Result<SensorDataSharingMessage, DecodeError> {
    let actual_bits = bytes.len() * 8;
    if actual_bits < HEADER_BITS {
        return Err(DecodeError::Truncated {
            expected_bits: HEADER_BITS,
            actual_bits,
        });
    }
    let mut r = BitReader::new(bytes);
    let msg_count = r.get(7) as u8;
    let source_id = r.get(32) as u32;
    let sdsm_time_ms = r.get(64);
    let ref_lat = r.get_signed(31) as i32;
    let ref_lon = r.get_signed(32) as i32;
    let ref_elev_dm = r.get_signed(16) as i16;
    let count = r.get(8) as usize;
    if count == 0 {
        return Err(DecodeError::Semantic {
            field: "object_count".into(),
            value: 0,
        });
    }
    let expected_bits = data_bits(count);
    if actual_bits < expected_bits {
        return Err(DecodeError::Truncated {
            expected_bits,
            actual_bits,
        });
    }
    let expected_bytes = encoded_len(count);
    if bytes.len() > expected_bytes {
        return Err(DecodeError::TrailingBytes {
            expected_bytes,
            actual_bytes: bytes.len(),
        });
    }
    let mut objects = Vec::with_capacity(count);
    for i in 0..count {
        let code = r.get(4) as u8;
        let obj_type = ObjectType::from_code(code).ok_or_else(|| DecodeError::Semantic {
            field: format!("objects[{i}].obj_type"),
            value: code.into(),
        })?;
        objects.push(DetectedObject {
            obj_type,
            obj_id: r.get(16) as u16,
            time_offset_ms: r.get(16) as u16,
            pos_offset_x_dm: r.get_signed(16) as i16,
            pos_offset_y_dm: r.get_signed(16) as i16,
            speed_units: r.get(16) as u16,
            heading_units: r.get(16) as u16,
            confidence_pct: r.get(7) as u8,
        });
    }
    let pad_bits = r.remaining();
    if r.get(pad_bits as u32) != 0 {
        return Err(DecodeError::Padding {
            bit_offset: expected_bits,
        });
    }
    let msg = SensorDataSharingMessage {
        msg_count,
        source_id,
        sdsm_time_ms,
        ref_lat,
        ref_lon,
        ref_elev_dm,
        objects,
    };
    if let Some((field, value)) = msg.violation() {
        return Err(DecodeError::Semantic { field, value });
    }
    Ok(msg)
}
