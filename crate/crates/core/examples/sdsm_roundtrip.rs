// Build an SDSM for a confirmed deer, encode it, dump the wire layout and
// decode it back.

use std::error::Error;

use wildnet::bbox::BBox;
use wildnet::detection::Detection;
use wildnet::sdsm::{decode, dump, encode, encoded_len, EgoPose, SdsmBuilder};
use wildnet::tracking::{evaluate_broadcast, ThresholdConfig, Tracker};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ThresholdConfig::default();
    let mut tracker = Tracker::new(cfg.clone());
    let epoch = 1_745_500_000_000;
    let det = Detection {
        frame_id: 0,
        bbox: BBox::new(80.0, 90.0, 140.0, 170.0),
        confidence: 0.82,
        class_id: 0,
        est_distance_ft: Some(55.0),
    };
    for k in 0..3 {
        tracker.update(std::slice::from_ref(&det), epoch + k * 40);
    }
    let track = tracker.tracks()[0].clone();
    assert!(evaluate_broadcast(&track, &cfg));

    let ego = EgoPose {
        lat: 35.8262,
        lon: -82.5487,
        elev_m: 800.0,
        heading_deg: 0.0,
        speed_mps: 8.0,
    };
    let msg = SdsmBuilder::new(1001).build(&track, Some(&ego), epoch + 80, 0)?;
    let bytes = encode(&msg)?;
    assert_eq!(bytes.len(), encoded_len(1));
    print!("{}", dump(&bytes));
    let back = decode(&bytes)?;
    assert_eq!(back, msg);
    println!("{}", serde_json::to_string_pretty(&back)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
