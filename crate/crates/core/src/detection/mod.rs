//! Frame preprocessing and the detector interface.

mod frame;
mod replay;

pub use frame::{
    heatmap_color, normalize_frame, preprocess, render_heatmap, resize_to_model_input, GrayFrame,
    HeatmapFrame, ThermalFrame, HEATMAP_STOPS, RAW_HEADER_LEN, SENSOR_HEIGHT, SENSOR_WIDTH,
};
pub use replay::{
    Detection, DetectorBackend, DetectorOutput, LogDetection, ReplayDetector, ReplayRecord,
    DEER_CLASS_ID, DEFAULT_INFERENCE_MS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("invalid frame: empty pixel buffer")]
    Empty,
    #[error("invalid frame: dimensions {width}x{height}")]
    Dimensions { width: u32, height: u32 },
    #[error("invalid frame: {len} pixels for {width}x{height}")]
    Length { width: u32, height: u32, len: usize },
    #[error("raw frame truncated: expected {expected} pixel bytes")]
    ShortRaw { expected: usize },
    #[error("raw frame has {0} trailing bytes")]
    TrailingRaw(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay log line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("replay log: {0}")]
    Io(#[from] std::io::Error),
}
