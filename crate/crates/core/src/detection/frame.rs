//! Thermal rasters and the preprocessing chain: min-max normalization to
//! 8-bit, nearest-neighbor resize to the model input and false-color
//! heatmap rendering.

use std::io::{Read, Write};

use super::FrameError;
use crate::bbox::MODEL_INPUT_SIZE;

/// Native sensor resolution.
pub const SENSOR_WIDTH: u32 = 256;
pub const SENSOR_HEIGHT: u32 = 192;

/// Size in bytes of the raw fixture header (width u32 LE, height u32 LE).
pub const RAW_HEADER_LEN: usize = 8;

/// Raw 16-bit radiometric frame as delivered by the camera.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThermalFrame {
    pub frame_id: u64,
    /// Capture time in ms since the scenario epoch.
    pub t_ms: u64,
    width: u32,
    height: u32,
    pixels: Vec<u16>,
}

impl ThermalFrame {
    pub fn new(
        frame_id: u64,
        t_ms: u64,
        width: u32,
        height: u32,
        pixels: Vec<u16>,
    ) -> Result<Self, FrameError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            frame_id,
            t_ms,
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Reads a raw fixture: 8-byte header then `width * height` u16 LE counts.
    pub fn read_raw<R: Read>(mut r: R, frame_id: u64, t_ms: u64) -> Result<Self, FrameError> {
        let mut header = [0u8; RAW_HEADER_LEN];
        r.read_exact(&mut header)?;
        let width = u32::from_le_bytes(header[0..4].try_into().unwrap());
        let height = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let n = (width as usize)
            .checked_mul(height as usize)
            .ok_or(FrameError::Dimensions { width, height })?;
        if n == 0 {
            return Err(FrameError::Empty);
        }
        let mut body = vec![0u8; n * 2];
        r.read_exact(&mut body)
            .map_err(|_| FrameError::ShortRaw { expected: n * 2 })?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(FrameError::TrailingRaw(rest.len()));
        }
        let pixels = body
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        Self::new(frame_id, t_ms, width, height, pixels)
    }

    pub fn write_raw<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        for p in &self.pixels {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }
}

/// 8-bit single-channel image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, FrameError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Binary PGM (P5) encoding, handy for eyeballing fixtures.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)
    }
}

/// False-color rendering of a [`GrayFrame`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeatmapFrame {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl HeatmapFrame {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Binary PPM (P6) encoding.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        for px in &self.pixels {
            w.write_all(px)?;
        }
        Ok(())
    }
}

fn check_dims(width: u32, height: u32, len: usize) -> Result<(), FrameError> {
    if len == 0 {
        return Err(FrameError::Empty);
    }
    if width == 0 || height == 0 {
        return Err(FrameError::Dimensions { width, height });
    }
    if (width as usize).checked_mul(height as usize) != Some(len) {
        return Err(FrameError::Length { width, height, len });
    }
    Ok(())
}

/// `round(num / den)` with halves rounded up, for non-negative operands.
fn div_round_half_up(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// Per-frame linear min-max stretch to `[0, 255]`. Constant frames map to 0.
pub fn normalize_frame(frame: &ThermalFrame) -> Result<GrayFrame, FrameError> {
    let px = frame.pixels();
    let (min, max) = px
        .iter()
        .fold((u16::MAX, u16::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if px.is_empty() {
        return Err(FrameError::Empty);
    }
    let span = u64::from(max - min);
    let out = if span == 0 {
        vec![0u8; px.len()]
    } else {
        px.iter()
            .map(|&v| div_round_half_up(255 * u64::from(v - min), span) as u8)
            .collect()
    };
    GrayFrame::new(frame.width(), frame.height(), out)
}

/// Nearest-neighbor stretch to 256x256; no letterboxing.
pub fn resize_to_model_input(frame: &GrayFrame) -> GrayFrame {
    let side = MODEL_INPUT_SIZE;
    if frame.width() == side && frame.height() == side {
        return frame.clone();
    }
    let (w, h) = (u64::from(frame.width()), u64::from(frame.height()));
    let cols: Vec<u32> = (0..u64::from(side))
        .map(|x| (x * w / u64::from(side)) as u32)
        .collect();
    let mut out = Vec::with_capacity((side * side) as usize);
    for y in 0..u64::from(side) {
        let sy = (y * h / u64::from(side)) as u32;
        out.extend(cols.iter().map(|&sx| frame.get(sx, sy)));
    }
    GrayFrame {
        width: side,
        height: side,
        pixels: out,
    }
}

/// Heatmap palette control points: black, blue, magenta, orange, white.
pub const HEATMAP_STOPS: [(u8, [u8; 3]); 5] = [
    (0, [0, 0, 0]),
    (64, [0, 0, 255]),
    (128, [255, 0, 255]),
    (192, [255, 128, 0]),
    (255, [255, 255, 255]),
];

/// Maps one gray level through the piecewise-linear palette.
pub fn heatmap_color(gray: u8) -> [u8; 3] {
    let seg = HEATMAP_STOPS
        .windows(2)
        .find(|w| gray <= w[1].0)
        .expect("last stop is 255");
    let (g0, c0) = seg[0];
    let (g1, c1) = seg[1];
    let den = u64::from(g1 - g0);
    let t = u64::from(gray - g0);
    let mut rgb = [0u8; 3];
    for ch in 0..3 {
        // c0*(1-s) + c1*s stays non-negative for descending channels too.
        let num = u64::from(c0[ch]) * (den - t) + u64::from(c1[ch]) * t;
        rgb[ch] = div_round_half_up(num, den) as u8;
    }
    rgb
}

pub fn render_heatmap(frame: &GrayFrame) -> HeatmapFrame {
    let lut: Vec<[u8; 3]> = (0..=255u8).map(heatmap_color).collect();
    HeatmapFrame {
        width: frame.width(),
        height: frame.height(),
        pixels: frame.pixels().iter().map(|&g| lut[g as usize]).collect(),
    }
}

/// Full preprocessing chain: normalize then resize.
pub fn preprocess(frame: &ThermalFrame) -> Result<GrayFrame, FrameError> {
    normalize_frame(frame).map(|g| resize_to_model_input(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn thermal(w: u32, h: u32, px: Vec<u16>) -> ThermalFrame {
        ThermalFrame::new(0, 0, w, h, px).unwrap()
    }

    #[test]
    fn constant_frame_normalizes_to_zero() {
        let g = normalize_frame(&thermal(4, 2, vec![5000; 8])).unwrap();
        assert!(g.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn stretch_endpoints_and_half_rounding() {
        let g = normalize_frame(&thermal(2, 1, vec![0, 65535])).unwrap();
        assert_eq!(g.pixels(), &[0, 255]);
        // 255 * 1000 / 2000 = 127.5 rounds up.
        let g = normalize_frame(&thermal(3, 1, vec![1000, 2000, 3000])).unwrap();
        assert_eq!(g.pixels(), &[0, 128, 255]);
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(matches!(
            ThermalFrame::new(0, 0, 0, 0, vec![]),
            Err(FrameError::Empty)
        ));
        assert!(matches!(
            ThermalFrame::new(0, 0, 3, 3, vec![1; 8]),
            Err(FrameError::Length { .. })
        ));
        assert!(matches!(
            ThermalFrame::new(0, 0, 0, 4, vec![1; 4]),
            Err(FrameError::Dimensions { .. })
        ));
    }

    /// Nearest-neighbor source index, evaluated independently per pixel.
    fn nn_oracle(src: &GrayFrame, x: u32, y: u32) -> u8 {
        let sx = ((f64::from(x) * f64::from(src.width())) / 256.0).floor() as u32;
        let sy = ((f64::from(y) * f64::from(src.height())) / 256.0).floor() as u32;
        src.get(sx, sy)
    }

    #[test]
    fn resize_checkerboard_into_quadrants() {
        let src = GrayFrame::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        let out = resize_to_model_input(&src);
        assert_eq!((out.width(), out.height()), (256, 256));
        for y in 0..256 {
            for x in 0..256 {
                let expect = if (x < 128) == (y < 128) { 0 } else { 255 };
                assert_eq!(out.get(x, y), expect);
                assert_eq!(out.get(x, y), nn_oracle(&src, x, y));
            }
        }
    }

    #[test]
    fn resize_identity_and_constant() {
        let px: Vec<u8> = (0..256 * 256).map(|i| (i * 7 % 251) as u8).collect();
        let src = GrayFrame::new(256, 256, px).unwrap();
        assert_eq!(resize_to_model_input(&src), src);
        let c = GrayFrame::new(256, 192, vec![7; 256 * 192]).unwrap();
        assert!(resize_to_model_input(&c).pixels().iter().all(|&v| v == 7));
    }

    #[test]
    fn heatmap_control_points_and_midpoint() {
        for (g, rgb) in HEATMAP_STOPS {
            assert_eq!(heatmap_color(g), rgb);
        }
        assert_eq!(heatmap_color(96), [128, 0, 255]);
    }

    #[test]
    fn heatmap_monotone_per_segment() {
        for w in HEATMAP_STOPS.windows(2) {
            let (g0, c0) = w[0];
            let (g1, c1) = w[1];
            for g in g0..g1 {
                let (a, b) = (heatmap_color(g), heatmap_color(g + 1));
                for ch in 0..3 {
                    if c1[ch] >= c0[ch] {
                        assert!(b[ch] >= a[ch], "gray {g} channel {ch}");
                    } else {
                        assert!(b[ch] <= a[ch], "gray {g} channel {ch}");
                    }
                }
            }
        }
    }

    #[test]
    fn raw_fixture_roundtrip_and_errors() {
        let f = ThermalFrame::new(3, 40, 3, 2, vec![1, 2, 3, 400, 500, 65535]).unwrap();
        let mut buf = Vec::new();
        f.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 12);
        assert_eq!(ThermalFrame::read_raw(&buf[..], 3, 40).unwrap(), f);
        assert!(matches!(
            ThermalFrame::read_raw(&buf[..buf.len() - 1], 3, 40),
            Err(FrameError::ShortRaw { .. })
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            ThermalFrame::read_raw(&long[..], 3, 40),
            Err(FrameError::TrailingRaw(1))
        ));
    }

    proptest! {
        #[test]
        fn nonconstant_spans_full_range(px in proptest::collection::vec(any::<u16>(), 2..64)) {
            prop_assume!(px.iter().min() != px.iter().max());
            let n = px.len() as u32;
            let g = normalize_frame(&thermal(n, 1, px)).unwrap();
            prop_assert_eq!(*g.pixels().iter().min().unwrap(), 0);
            prop_assert_eq!(*g.pixels().iter().max().unwrap(), 255);
        }

        #[test]
        fn affine_invariant(
            px in proptest::collection::vec(0u16..1000, 1..64),
            a in 1u16..60,
            b in 0u16..5000,
        ) {
            let n = px.len() as u32;
            let moved: Vec<u16> = px.iter().map(|&v| v * a + b).collect();
            let g1 = normalize_frame(&thermal(n, 1, px)).unwrap();
            let g2 = normalize_frame(&thermal(n, 1, moved)).unwrap();
            prop_assert_eq!(g1, g2);
        }

        #[test]
        fn resize_creates_no_new_values(
            w in 1u32..40, h in 1u32..40, seed in any::<u64>(),
        ) {
            let px: Vec<u8> = (0..w * h)
                .map(|i| (seed.wrapping_mul(u64::from(i) + 1) >> 56) as u8)
                .collect();
            let src = GrayFrame::new(w, h, px).unwrap();
            let out = resize_to_model_input(&src);
            let present: std::collections::HashSet<u8> = src.pixels().iter().copied().collect();
            prop_assert!(out.pixels().iter().all(|v| present.contains(v)));
            for &(x, y) in &[(0u32, 0u32), (255, 255), (17, 200), (130, 3)] {
                prop_assert_eq!(out.get(x, y), nn_oracle(&src, x, y));
            }
        }
    }
}
