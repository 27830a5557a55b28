//! Detection evaluation: matching, PR curves, AP/mAP, F1, confusion
//! matrix, range-binned accuracy and split validation.

mod confusion;
mod matching;
mod metrics;
mod report;

pub use crate::bbox::iou;
pub use confusion::{
    confusion_matrix, range_binned_accuracy, validate_split, ConfusionMatrix, NormalizedConfusion,
    RangeBin, SplitCheck, SplitStats, RANGE_BINS_FT, SPLIT_PCT_TOLERANCE,
};
pub use matching::{match_detections, GtBox, ImageMatch, PredBox};
pub use metrics::{
    ap_at, average_precision, f1, iou_sweep, map_sweep, match_dataset, pr_curve, PrCurve, PrPoint,
    AP_SAMPLES,
};
pub use report::{
    evaluate, render_metrics_table, render_range_table, EvalReport, DEFAULT_CONF_THRESH,
    DEFAULT_IOU_THRESH,
};

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::ReplayRecord;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no ground-truth boxes: recall is undefined")]
    NoGroundTruth,
    #[error("prediction image id {0:?} has no ground-truth entry")]
    MismatchedImage(String),
    #[error("line {line}: duplicate image id {image_id:?}")]
    DuplicateImage { line: usize, image_id: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ground truth {gt} of image #{image} has no usable est_distance_ft")]
    MissingDistance { image: usize, gt: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Image ids may be written as strings or integers.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
enum RawId {
    Num(u64),
    Text(String),
}

impl From<RawId> for String {
    fn from(id: RawId) -> Self {
        match id {
            RawId::Num(n) => n.to_string(),
            RawId::Text(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageGt {
    #[serde(deserialize_with = "de_id")]
    pub image_id: String,
    pub boxes: Vec<GtBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagePreds {
    #[serde(deserialize_with = "de_id")]
    pub image_id: String,
    pub detections: Vec<PredBox>,
}

fn de_id<'de, D: serde::Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    RawId::deserialize(d).map(Into::into)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GroundTruthSet {
    pub images: Vec<ImageGt>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PredictionSet {
    pub images: Vec<ImagePreds>,
}

fn lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String), EvalError>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e.into())),
    })
}

fn check_box(line: usize, b: &crate::bbox::BBox) -> Result<(), EvalError> {
    if b.is_well_formed() {
        Ok(())
    } else {
        Err(EvalError::Parse {
            line,
            msg: format!("malformed bbox {:?}", <[f64; 4]>::from(*b)),
        })
    }
}

impl GroundTruthSet {
    pub fn from_reader<R: BufRead>(r: R) -> Result<Self, EvalError> {
        let mut images = Vec::new();
        let mut seen = BTreeSet::new();
        for item in lines(r) {
            let (line, text) = item?;
            let img: ImageGt = serde_json::from_str(&text).map_err(|e| EvalError::Parse {
                line,
                msg: e.to_string(),
            })?;
            for b in &img.boxes {
                check_box(line, &b.bbox)?;
                if b.est_distance_ft
                    .is_some_and(|d| !(d.is_finite() && d >= 0.0))
                {
                    return Err(EvalError::Parse {
                        line,
                        msg: "est_distance_ft must be non-negative".into(),
                    });
                }
            }
            if !seen.insert(img.image_id.clone()) {
                return Err(EvalError::DuplicateImage {
                    line,
                    image_id: img.image_id,
                });
            }
            images.push(img);
        }
        Ok(Self { images })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn num_boxes(&self) -> usize {
        self.images.iter().map(|i| i.boxes.len()).sum()
    }
}

impl PredictionSet {
    /// One image per line, either `{"image_id", "detections"}` or a
    /// detection replay-log record keyed by `frame_id`.
    pub fn from_reader<R: BufRead>(r: R) -> Result<Self, EvalError> {
        let mut images = Vec::new();
        let mut seen = BTreeSet::new();
        for item in lines(r) {
            let (line, text) = item?;
            let parse_err = |e: serde_json::Error| EvalError::Parse {
                line,
                msg: e.to_string(),
            };
            let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
            let img = if value.get("frame_id").is_some() {
                let rec: ReplayRecord = serde_json::from_value(value).map_err(parse_err)?;
                ImagePreds {
                    image_id: rec.frame_id.to_string(),
                    detections: rec
                        .detections
                        .iter()
                        .map(|d| PredBox {
                            bbox: d.bbox,
                            conf: d.conf,
                            class_id: d.class_id,
                        })
                        .collect(),
                }
            } else {
                serde_json::from_value(value).map_err(parse_err)?
            };
            for p in &img.detections {
                check_box(line, &p.bbox)?;
                if !(0.0..=1.0).contains(&p.conf) {
                    return Err(EvalError::Parse {
                        line,
                        msg: format!("conf {} outside [0, 1]", p.conf),
                    });
                }
            }
            if !seen.insert(img.image_id.clone()) {
                return Err(EvalError::DuplicateImage {
                    line,
                    image_id: img.image_id,
                });
            }
            images.push(img);
        }
        Ok(Self { images })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn num_boxes(&self) -> usize {
        self.images.iter().map(|i| i.detections.len()).sum()
    }

    /// Drops predictions below `conf`.
    pub fn filtered(&self, conf: f64) -> Self {
        Self {
            images: self
                .images
                .iter()
                .map(|i| ImagePreds {
                    image_id: i.image_id.clone(),
                    detections: i
                        .detections
                        .iter()
                        .copied()
                        .filter(|p| p.conf >= conf)
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Ground truth and predictions for one image.
pub type AlignedImage<'a> = (&'a [GtBox], Vec<PredBox>);

/// Pairs each ground-truth image with its predictions, in ground-truth
/// order. An image absent from the predictions has none; a prediction
/// image absent from the ground truth is an error.
pub fn align<'a>(
    gt: &'a GroundTruthSet,
    preds: &PredictionSet,
) -> Result<Vec<AlignedImage<'a>>, EvalError> {
    let known: BTreeSet<&str> = gt.images.iter().map(|i| i.image_id.as_str()).collect();
    if let Some(bad) = preds
        .images
        .iter()
        .find(|p| !known.contains(p.image_id.as_str()))
    {
        return Err(EvalError::MismatchedImage(bad.image_id.clone()));
    }
    let by_id: BTreeMap<&str, &ImagePreds> = preds
        .images
        .iter()
        .map(|p| (p.image_id.as_str(), p))
        .collect();
    Ok(gt
        .images
        .iter()
        .map(|g| {
            let p = by_id
                .get(g.image_id.as_str())
                .map(|p| p.detections.clone())
                .unwrap_or_default();
            (g.boxes.as_slice(), p)
        })
        .collect())
}
