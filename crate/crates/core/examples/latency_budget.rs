// The per-stage latency budget: typical midpoints pass, one slow stage
// is flagged.

use std::error::Error;

use wildnet::sim::{check_budgets, FrameTiming, Stage, StageTimings};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let typical = StageTimings::typical_midpoints();
    for s in Stage::ALL {
        println!(
            "{:<10} {:>6} us (max {})",
            s.name(),
            typical.get(s),
            s.max_us()
        );
    }
    let frame = |id, timings| FrameTiming {
        frame_id: id,
        alert_path: true,
        timings,
    };
    let r = check_budgets(&[frame(1, typical)]);
    println!(
        "total {} us, median under target {}, violations {}",
        typical.total_us,
        r.median_under_target,
        r.violations.len()
    );

    let mut stages = typical.stages();
    stages[1] = 70_000;
    let slow = StageTimings::from_stages(stages);
    let r = check_budgets(&[frame(1, typical), frame(2, slow)]);
    println!("{}", serde_json::to_string(&r.violations)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
