#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildnet::bbox::BBox;
use wildnet::eval::{
    match_detections, GroundTruthSet, GtBox, ImageGt, ImagePreds, PredBox, PredictionSet,
};
use wildnet::sdsm::{DetectedObject, ObjectType, SensorDataSharingMessage, LAT_LIMIT, LON_LIMIT};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_object(r: &mut ChaCha8Rng) -> DetectedObject {
    DetectedObject {
        obj_type: ObjectType::from_code(r.gen_range(0..4)).unwrap(),
        obj_id: r.gen(),
        time_offset_ms: r.gen(),
        pos_offset_x_dm: r.gen(),
        pos_offset_y_dm: r.gen(),
        speed_units: r.gen(),
        heading_units: r.gen_range(0..28_800),
        confidence_pct: r.gen_range(0..=100),
    }
}

/// Valid message with 1..=max_objects objects; small counts dominate.
pub fn random_sdsm(r: &mut ChaCha8Rng, max_objects: usize) -> SensorDataSharingMessage {
    let n = if r.gen_bool(0.9) {
        r.gen_range(1..=max_objects.min(4))
    } else {
        r.gen_range(1..=max_objects)
    };
    SensorDataSharingMessage {
        msg_count: r.gen_range(0..=127),
        source_id: r.gen(),
        sdsm_time_ms: r.gen(),
        ref_lat: r.gen_range(-LAT_LIMIT..=LAT_LIMIT),
        ref_lon: r.gen_range(-LON_LIMIT..=LON_LIMIT),
        ref_elev_dm: r.gen(),
        objects: (0..n).map(|_| random_object(r)).collect(),
    }
}

fn random_box(r: &mut ChaCha8Rng) -> BBox {
    let x = r.gen_range(0..12) as f64;
    let y = r.gen_range(0..12) as f64;
    let w = r.gen_range(2..8) as f64;
    let h = r.gen_range(2..8) as f64;
    BBox::new(x, y, x + w, y + h)
}

/// Up to 4 images and 10 boxes in total, at least one ground truth.
/// Coarse grids and confidences make overlaps and ties common.
pub fn random_instance(r: &mut ChaCha8Rng) -> (GroundTruthSet, PredictionSet) {
    let images = r.gen_range(1..=4);
    let n_gt = r.gen_range(1..=5);
    let n_pred = r.gen_range(0..=10 - n_gt);
    let mut gt: Vec<ImageGt> = (0..images)
        .map(|i| ImageGt {
            image_id: format!("i{i}"),
            boxes: vec![],
        })
        .collect();
    let mut pr: Vec<ImagePreds> = (0..images)
        .map(|i| ImagePreds {
            image_id: format!("i{i}"),
            detections: vec![],
        })
        .collect();
    for _ in 0..n_gt {
        let i = r.gen_range(0..images);
        gt[i].boxes.push(GtBox {
            bbox: random_box(r),
            class_id: 0,
            est_distance_ft: None,
        });
    }
    for _ in 0..n_pred {
        let i = r.gen_range(0..images);
        // Half the predictions sit near a ground truth of the same image.
        let bbox = match gt[i].boxes.first() {
            Some(g) if r.gen_bool(0.5) => {
                let dx = r.gen_range(-1..=1) as f64;
                BBox::new(
                    g.bbox.x_min + dx,
                    g.bbox.y_min,
                    g.bbox.x_max + dx,
                    g.bbox.y_max,
                )
            }
            _ => random_box(r),
        };
        pr[i].detections.push(PredBox {
            bbox,
            conf: r.gen_range(1..=9) as f64 / 10.0,
            class_id: 0,
        });
    }
    (GroundTruthSet { images: gt }, PredictionSet { images: pr })
}

/// Enumerates every confidence cut, re-matches each image from scratch on
/// the surviving predictions and takes, for each of the 101 recall levels,
/// the best precision among cuts reaching it.
pub fn brute_force_ap(gt: &GroundTruthSet, preds: &PredictionSet, iou: f64) -> f64 {
    let n_gt: usize = gt.images.iter().map(|i| i.boxes.len()).sum();
    let mut cuts: Vec<f64> = preds
        .images
        .iter()
        .flat_map(|i| i.detections.iter().map(|d| d.conf))
        .collect();
    cuts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    cuts.dedup();
    let mut pts = Vec::new();
    for &t in &cuts {
        let (mut tp, mut kept) = (0usize, 0usize);
        for g in &gt.images {
            let p: Vec<PredBox> = preds
                .images
                .iter()
                .filter(|p| p.image_id == g.image_id)
                .flat_map(|p| p.detections.iter().copied())
                .filter(|d| d.conf >= t)
                .collect();
            kept += p.len();
            tp += match_detections(&p, &g.boxes, iou).tp();
        }
        pts.push((tp as f64 / n_gt as f64, tp as f64 / kept as f64));
    }
    let mut sum = 0.0;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        let best = pts
            .iter()
            .filter(|p| p.0 >= r)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        sum += best;
    }
    sum / 101.0
}
