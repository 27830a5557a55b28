// Run the bundled two-vehicle, one-RSU scenario and print the summary.

use std::error::Error;

use wildnet::sim::{load_scenario, render_summary, run};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/marshill_small.json");
    let scenario = load_scenario(path)?;
    let report = run(&scenario)?;
    print!("{}", render_summary(&report));
    for a in &report.receiver_alerts {
        println!(
            "frame {} -> station {} (hop {}) conf {}% after {} us on air",
            a.frame_id, a.station_id, a.hop_count, a.confidence_pct, a.air_latency_us
        );
    }
    assert!(report.complete);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
