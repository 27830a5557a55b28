//! Confusion matrix, range-binned accuracy and split validation.

use serde::{Deserialize, Serialize};

use super::matching::ImageMatch;
use super::EvalError;

/// Deer vs background counts. Background has no bounded set of negatives in
/// open-set detection, so TN is not applicable and serialized as null.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: Option<u64>,
}

/// Each column divided by its actual-class total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalizedConfusion {
    /// Actual deer: predicted deer / predicted background.
    pub deer_deer: Option<f64>,
    pub deer_background: Option<f64>,
    /// Actual background: predicted deer. The background/background cell
    /// is not applicable.
    pub background_deer: Option<f64>,
}

impl ConfusionMatrix {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp).unwrap_or(0.0)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_).unwrap_or(0.0)
    }

    pub fn normalized(&self) -> NormalizedConfusion {
        let deer = self.tp + self.fn_;
        NormalizedConfusion {
            deer_deer: ratio(self.tp, deer),
            deer_background: ratio(self.fn_, deer),
            background_deer: ratio(self.fp, self.fp),
        }
    }
}

fn ratio(n: u64, d: u64) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

/// Counts after dropping predictions below `conf_thresh`. The matches must
/// come from [`match_detections`](super::match_detections) over
/// predictions already filtered at the same threshold.
pub fn confusion_matrix(matches: &[ImageMatch]) -> ConfusionMatrix {
    let mut c = ConfusionMatrix::default();
    for m in matches {
        c.tp += m.tp() as u64;
        c.fp += m.fp() as u64;
        c.fn_ += m.fn_() as u64;
    }
    c
}

/// Lower-inclusive distance bins in feet.
pub const RANGE_BINS_FT: [(f64, f64, &str); 5] = [
    (0.0, 20.0, "<20"),
    (20.0, 50.0, "20-50"),
    (50.0, 70.0, "50-70"),
    (70.0, 100.0, "70-100"),
    (100.0, f64::INFINITY, ">=100"),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeBin {
    pub label: String,
    pub detected: u64,
    pub total: u64,
    /// `None` for an empty bin.
    pub accuracy: Option<f64>,
}

/// Fraction of ground truths detected, per distance bin. `distances` lines
/// up with `matches` image by image and box by box.
pub fn range_binned_accuracy(
    distances: &[Vec<Option<f64>>],
    matches: &[ImageMatch],
) -> Result<Vec<RangeBin>, EvalError> {
    let mut counts = [(0u64, 0u64); RANGE_BINS_FT.len()];
    for (img, (dists, m)) in distances.iter().zip(matches).enumerate() {
        for (gi, d) in dists.iter().enumerate() {
            let d = d.ok_or(EvalError::MissingDistance { image: img, gt: gi })?;
            let bin = RANGE_BINS_FT
                .iter()
                .position(|&(lo, hi, _)| d >= lo && d < hi)
                .ok_or(EvalError::MissingDistance { image: img, gt: gi })?;
            counts[bin].1 += 1;
            if m.gt_pred[gi].is_some() {
                counts[bin].0 += 1;
            }
        }
    }
    Ok(RANGE_BINS_FT
        .iter()
        .zip(counts)
        .map(|(&(_, _, label), (detected, total))| RangeBin {
            label: label.to_string(),
            detected,
            total,
            accuracy: ratio(detected, total),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub train: u64,
    pub val: u64,
    pub test: u64,
    pub total: u64,
    /// Published percentages to check against, if any.
    #[serde(default)]
    pub reported_pct: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCheck {
    pub pass: bool,
    pub percentages: [f64; 3],
    pub failures: Vec<String>,
}

pub const SPLIT_PCT_TOLERANCE: f64 = 0.1;

pub fn validate_split(s: &SplitStats) -> SplitCheck {
    let mut failures = Vec::new();
    let counts = [s.train, s.val, s.test];
    let sum: u64 = counts.iter().sum();
    if s.total == 0 {
        failures.push("empty dataset".to_string());
    }
    if sum != s.total {
        failures.push(format!("sum {sum} != total {}", s.total));
    }
    let percentages = counts.map(|c| {
        if s.total == 0 {
            0.0
        } else {
            100.0 * c as f64 / s.total as f64
        }
    });
    if let Some(rep) = s.reported_pct {
        for (name, (got, want)) in ["train", "val", "test"]
            .iter()
            .zip(percentages.iter().zip(rep))
        {
            if (got - want).abs() > SPLIT_PCT_TOLERANCE + 1e-9 {
                failures.push(format!("{name} {got:.2}% vs reported {want}%"));
            }
        }
    }
    SplitCheck {
        pass: failures.is_empty(),
        percentages,
        failures,
    }
}
