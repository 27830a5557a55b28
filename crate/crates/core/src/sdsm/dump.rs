//! Annotated hex rendering of an encoded SDSM.

use std::fmt::Write as _;

use super::bits::BitReader;
use super::codec::{decode, FieldSpec, HEADER_BITS, HEADER_FIELDS, OBJECT_BITS, OBJECT_FIELDS};

/// One row per wire field: bit offset, width, the bytes the field touches,
/// field path and decoded value. Walks the layout even when the buffer does
/// not decode, and ends with the padding summary and decode verdict.
pub fn dump(bytes: &[u8]) -> String {
    let mut out = String::new();
    let total_bits = bytes.len() * 8;
    let _ = writeln!(out, "hex ({} bytes):", bytes.len());
    for (i, chunk) in bytes.chunks(16).enumerate() {
        let hex: Vec<String> = chunk.iter().map(|b| format!("{b:02x}")).collect();
        let _ = writeln!(out, "  {:04x}: {}", i * 16, hex.join(" "));
    }
    let _ = writeln!(out, "fields:");
    let _ = writeln!(
        out,
        "  {:>5} {:>4}  {:<18} {:<28} value",
        "bit", "len", "bytes", "field"
    );

    let mut r = BitReader::new(bytes);
    let mut rows = |r: &mut BitReader<'_>, prefix: &str, fields: &[FieldSpec]| -> Option<u64> {
        let mut last = 0;
        for f in fields {
            if r.remaining() < f.bits as usize {
                let _ = writeln!(
                    out,
                    "  {:>5} {:>4}  <truncated: {} bits left>",
                    r.position(),
                    f.bits,
                    r.remaining()
                );
                return None;
            }
            let start = r.position();
            let value = if f.signed {
                r.get_signed(f.bits).to_string()
            } else {
                let v = r.get(f.bits);
                last = v;
                v.to_string()
            };
            let end = r.position();
            let span: Vec<String> = bytes[start / 8..end.div_ceil(8)]
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect();
            let _ = writeln!(
                out,
                "  {:>5} {:>4}  {:<18} {:<28} {}",
                start,
                f.bits,
                span.join(""),
                format!("{prefix}{}", f.name),
                value
            );
        }
        Some(last)
    };

    let mut data_bits = None;
    if let Some(count) = rows(&mut r, "", &HEADER_FIELDS) {
        let mut complete = true;
        for i in 0..count {
            if rows(&mut r, &format!("objects[{i}]."), &OBJECT_FIELDS).is_none() {
                complete = false;
                break;
            }
        }
        if complete {
            data_bits = Some(HEADER_BITS + OBJECT_BITS * count as usize);
        }
    }
    match data_bits {
        Some(bits) => {
            let pad = total_bits.saturating_sub(bits);
            let pad_value = if pad <= 64 {
                r.get(pad as u32)
            } else {
                u64::MAX
            };
            let _ = writeln!(
                out,
                "data bits: {bits}, pad bits: {pad} (value {pad_value:#x})"
            );
        }
        None => {
            let _ = writeln!(out, "data bits: incomplete, buffer bits: {total_bits}");
        }
    }
    match decode(bytes) {
        Ok(_) => {
            let _ = writeln!(out, "decode: ok");
        }
        Err(e) => {
            let _ = writeln!(out, "decode: error: {e}");
        }
    }
    out
}
