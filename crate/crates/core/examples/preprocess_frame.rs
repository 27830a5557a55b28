// Normalize a raw thermal frame, resize it for the detector and render the
// false-color heatmap. Writes PGM/PPM files to the temp directory.

use std::error::Error;

use wildnet::bbox::BBox;
use wildnet::detection::{normalize_frame, render_heatmap, resize_to_model_input, Detection};
use wildnet::sim::synthetic_frame;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let deer = Detection {
        frame_id: 1,
        bbox: BBox::new(80.0, 90.0, 140.0, 170.0),
        confidence: 0.82,
        class_id: 0,
        est_distance_ft: Some(55.0),
    };
    let raw = synthetic_frame(1, 0, 256, 192, &[deer]);
    let gray = normalize_frame(&raw)?;
    let input = resize_to_model_input(&gray);
    let heat = render_heatmap(&input);

    let lo = raw.pixels().iter().min().unwrap();
    let hi = raw.pixels().iter().max().unwrap();
    println!("raw {}x{} counts {lo}..={hi}", raw.width(), raw.height());
    println!("model input {}x{}", input.width(), input.height());
    println!(
        "deer center gray {} -> rgb {:?}",
        input.get(110, 130),
        heat.pixels()[130 * 256 + 110]
    );

    let dir = std::env::temp_dir();
    let pgm = dir.join("wildnet_frame.pgm");
    let ppm = dir.join("wildnet_frame.ppm");
    input.write_pgm(std::fs::File::create(&pgm)?)?;
    heat.write_ppm(std::fs::File::create(&ppm)?)?;
    println!("wrote {} and {}", pgm.display(), ppm.display());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
