//! Precision/recall curves, average precision and F1.

use serde::Serialize;

use super::matching::{match_detections, ImageMatch};
use super::{EvalError, GroundTruthSet, PredictionSet};

/// Cumulative counts at one confidence cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrPoint {
    /// Predictions with confidence at or above this value are kept.
    pub conf: f64,
    pub tp: u64,
    pub fp: u64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrCurve {
    pub num_gt: u64,
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.recall, p.precision))
            .collect()
    }
}

/// Sweeps the confidence cut over every distinct prediction confidence,
/// highest first.
pub fn pr_curve(matches: &[ImageMatch]) -> Result<PrCurve, EvalError> {
    let num_gt: u64 = matches.iter().map(|m| m.num_gt() as u64).sum();
    if num_gt == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let mut scored: Vec<(f64, bool)> = matches
        .iter()
        .flat_map(|m| {
            m.pred_conf
                .iter()
                .zip(&m.pred_gt)
                .map(|(&c, g)| (c, g.is_some()))
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (i, &(conf, hit)) in scored.iter().enumerate() {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        if scored.get(i + 1).is_some_and(|n| n.0 == conf) {
            continue;
        }
        points.push(PrPoint {
            conf,
            tp,
            fp,
            recall: tp as f64 / num_gt as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    Ok(PrCurve { num_gt, points })
}

pub const AP_SAMPLES: u64 = 101;

/// 101-point interpolated AP: at each recall level r in {0, 0.01, .., 1}
/// take the best precision among points with recall >= r (0 if none) and
/// average.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let mut sum = 0.0;
    for i in 0..AP_SAMPLES {
        // recall >= i/100, compared exactly
        let best = curve
            .points
            .iter()
            .filter(|p| p.tp * 100 >= i * curve.num_gt)
            .map(|p| p.precision)
            .fold(0.0, f64::max);
        sum += best;
    }
    sum / AP_SAMPLES as f64
}

/// IoU thresholds 0.50, 0.55, .., 0.95.
pub fn iou_sweep() -> [f64; 10] {
    std::array::from_fn(|k| (50 + 5 * k) as f64 / 100.0)
}

pub fn match_dataset(
    gt: &GroundTruthSet,
    preds: &PredictionSet,
    iou_thresh: f64,
) -> Result<Vec<ImageMatch>, EvalError> {
    let aligned = super::align(gt, preds)?;
    Ok(aligned
        .iter()
        .map(|(g, p)| match_detections(p, g, iou_thresh))
        .collect())
}

pub fn ap_at(
    gt: &GroundTruthSet,
    preds: &PredictionSet,
    iou_thresh: f64,
) -> Result<f64, EvalError> {
    Ok(average_precision(&pr_curve(&match_dataset(
        gt, preds, iou_thresh,
    )?)?))
}

/// `(AP@0.5, mean AP over 0.50:0.95)`.
pub fn map_sweep(gt: &GroundTruthSet, preds: &PredictionSet) -> Result<(f64, f64), EvalError> {
    let aps = iou_sweep()
        .into_iter()
        .map(|t| ap_at(gt, preds, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((aps[0], aps.iter().sum::<f64>() / aps.len() as f64))
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
