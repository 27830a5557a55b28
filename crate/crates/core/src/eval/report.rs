//! The evaluation report and its text tables.

use std::fmt::Write as _;

use serde::Serialize;

use super::confusion::{
    confusion_matrix, range_binned_accuracy, ConfusionMatrix, NormalizedConfusion, RangeBin,
};
use super::metrics::{average_precision, f1, map_sweep, match_dataset, pr_curve, PrPoint};
use super::{EvalError, GroundTruthSet, PredictionSet};

pub const DEFAULT_IOU_THRESH: f64 = 0.5;
pub const DEFAULT_CONF_THRESH: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub num_images: usize,
    pub num_gt: usize,
    pub num_predictions: usize,
    pub iou_thresh: f64,
    /// Cut applied for precision, recall, F1, the confusion matrix and the
    /// range bins. AP uses every prediction.
    pub conf_thresh: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ap50: f64,
    pub map5095: f64,
    pub pr_curve: Vec<PrPoint>,
    pub confusion: ConfusionMatrix,
    pub confusion_normalized: NormalizedConfusion,
    /// Present when every ground-truth box carries a distance.
    pub range_bins: Option<Vec<RangeBin>>,
}

pub fn evaluate(
    gt: &GroundTruthSet,
    preds: &PredictionSet,
    conf_thresh: f64,
) -> Result<EvalReport, EvalError> {
    let all = match_dataset(gt, preds, DEFAULT_IOU_THRESH)?;
    let curve = pr_curve(&all)?;
    let ap50 = average_precision(&curve);
    let (_, map5095) = map_sweep(gt, preds)?;
    let cut = match_dataset(gt, &preds.filtered(conf_thresh), DEFAULT_IOU_THRESH)?;
    let confusion = confusion_matrix(&cut);
    let distances: Vec<Vec<Option<f64>>> = gt
        .images
        .iter()
        .map(|i| i.boxes.iter().map(|b| b.est_distance_ft).collect())
        .collect();
    let has_all = distances.iter().flatten().all(Option::is_some);
    let range_bins = if has_all {
        Some(range_binned_accuracy(&distances, &cut)?)
    } else {
        None
    };
    let (precision, recall) = (confusion.precision(), confusion.recall());
    Ok(EvalReport {
        num_images: gt.images.len(),
        num_gt: gt.num_boxes(),
        num_predictions: preds.num_boxes(),
        iou_thresh: DEFAULT_IOU_THRESH,
        conf_thresh,
        precision,
        recall,
        f1: f1(precision, recall),
        ap50,
        map5095,
        pr_curve: curve.points,
        confusion,
        confusion_normalized: confusion.normalized(),
        range_bins,
    })
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// Metric/value block in the layout of a model performance table.
pub fn render_metrics_table(r: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16} {:>10}", "Metric", "Value");
    for (name, v) in [
        ("mAP@0.5", r.ap50),
        ("mAP@0.5:0.95", r.map5095),
        ("Precision", r.precision),
        ("Recall", r.recall),
        ("F1 Score", r.f1),
    ] {
        let _ = writeln!(out, "{name:<16} {:>10}", pct(v));
    }
    let c = &r.confusion;
    let _ = writeln!(
        out,
        "confusion @conf {}: TP {}  FP {}  FN {}  TN n/a",
        r.conf_thresh, c.tp, c.fp, c.fn_
    );
    out
}

/// Detection accuracy by distance band.
pub fn render_range_table(bins: &[RangeBin]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>9} {:>10}",
        "Range (ft)", "Detected", "Accuracy"
    );
    for b in bins {
        let acc = b.accuracy.map_or_else(|| "n/a".to_string(), pct);
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>10}",
            b.label,
            format!("{}/{}", b.detected, b.total),
            acc
        );
    }
    out
}
