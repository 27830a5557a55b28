//! Thermal deer detection to V2X alert pipeline.
//!
//! Frames are normalized and false-colored ([`detection`]), detections are
//! confirmed across consecutive frames ([`tracking`]), confirmed deer are
//! packed into sensor data sharing messages ([`sdsm`]) and broadcast over a
//! simulated OBU/RSU radio channel ([`v2x`]). [`sim`] drives the whole
//! chain from a scenario file and checks the latency budget; [`eval`]
//! scores detections against ground truth.

pub mod bbox;
pub mod cli;
pub mod detection;
pub mod eval;
pub mod geo;
pub mod sdsm;
pub mod sim;
pub mod tracking;
pub mod v2x;
