// Feed a steady deer detection through the tracker and watch the driver
// warning fire immediately while the broadcast waits for confirmation.

use std::error::Error;

use wildnet::bbox::BBox;
use wildnet::detection::Detection;
use wildnet::tracking::{evaluate_broadcast, evaluate_driver_warning, ThresholdConfig, Tracker};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ThresholdConfig::default();
    let mut tracker = Tracker::new(cfg.clone());
    let det = |frame_id, conf| Detection {
        frame_id,
        bbox: BBox::new(80.0, 90.0, 140.0, 170.0),
        confidence: conf,
        class_id: 0,
        est_distance_ft: Some(55.0),
    };
    let stream = [0.82, 0.82, 0.82, 0.80, 0.0, 0.0, 0.79];
    let mut broadcasts = 0;
    for (i, &conf) in stream.iter().enumerate() {
        let frame = i as u64 + 1;
        let dets: Vec<Detection> = if conf > 0.0 {
            vec![det(frame, conf)]
        } else {
            vec![]
        };
        for t in tracker.update(&dets, frame * 40) {
            let warn = t.is_fresh() && evaluate_driver_warning(t, &cfg);
            let send = evaluate_broadcast(t, &cfg) && t.mark_broadcast();
            broadcasts += usize::from(send);
            println!(
                "frame {frame}: track {} hits {} age {} warn {warn} broadcast {send}",
                t.track_id, t.consecutive_hits, t.age_frames
            );
        }
    }
    println!("broadcasts: {broadcasts}");
    assert_eq!(broadcasts, 1);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
