//! Greedy confidence-ordered matching of predictions to ground truth.

use serde::{Deserialize, Serialize};

use crate::bbox::{iou, BBox};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtBox {
    pub bbox: BBox,
    #[serde(default)]
    pub class_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub est_distance_ft: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredBox {
    pub bbox: BBox,
    pub conf: f64,
    #[serde(default)]
    pub class_id: u32,
}

/// Outcome of matching one image. Indices refer to the input slices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImageMatch {
    /// For each prediction, the ground truth it matched.
    pub pred_gt: Vec<Option<usize>>,
    /// For each ground truth, the prediction that matched it.
    pub gt_pred: Vec<Option<usize>>,
    pub pred_conf: Vec<f64>,
}

impl ImageMatch {
    pub fn tp(&self) -> usize {
        self.pred_gt.iter().filter(|m| m.is_some()).count()
    }

    pub fn fp(&self) -> usize {
        self.pred_gt.len() - self.tp()
    }

    pub fn fn_(&self) -> usize {
        self.gt_pred.iter().filter(|m| m.is_none()).count()
    }

    pub fn num_gt(&self) -> usize {
        self.gt_pred.len()
    }
}

/// Predictions are visited by descending confidence (input order among
/// equals). Each takes the unmatched same-class ground truth with the
/// highest IoU, provided that IoU is positive and at least `iou_thresh`;
/// equal IoUs go to the lower ground-truth index.
pub fn match_detections(preds: &[PredBox], gts: &[GtBox], iou_thresh: f64) -> ImageMatch {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].conf.total_cmp(&preds[a].conf));
    let mut m = ImageMatch {
        pred_gt: vec![None; preds.len()],
        gt_pred: vec![None; gts.len()],
        pred_conf: preds.iter().map(|p| p.conf).collect(),
    };
    for pi in order {
        let p = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if m.gt_pred[gi].is_some() || g.class_id != p.class_id {
                continue;
            }
            let v = iou(&p.bbox, &g.bbox);
            if v <= 0.0 || v < iou_thresh {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((gi, v));
            }
        }
        if let Some((gi, _)) = best {
            m.pred_gt[pi] = Some(gi);
            m.gt_pred[gi] = Some(pi);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gt(x0: f64, y0: f64, x1: f64, y1: f64) -> GtBox {
        GtBox {
            bbox: BBox::new(x0, y0, x1, y1),
            class_id: 0,
            est_distance_ft: None,
        }
    }

    fn pred(b: BBox, conf: f64) -> PredBox {
        PredBox {
            bbox: b,
            conf,
            class_id: 0,
        }
    }

    /// Exhaustive: enumerate every partial one-to-one assignment that
    /// respects the threshold and pick the lexicographically best, scoring
    /// predictions in confidence order by (IoU, lower gt index).
    fn oracle(preds: &[PredBox], gts: &[GtBox], t: f64) -> Vec<Option<usize>> {
        let mut idx: Vec<usize> = (0..preds.len()).collect();
        idx.sort_by(|&a, &b| preds[b].conf.partial_cmp(&preds[a].conf).unwrap());
        let ok = |p: usize, g: usize| {
            let v = iou(&preds[p].bbox, &gts[g].bbox);
            v > 0.0 && v >= t
        };
        #[allow(clippy::type_complexity)]
        let mut best: Option<(Vec<(f64, i64)>, Vec<Option<usize>>)> = None;
        let mut cur = vec![None; preds.len()];
        fn rec(
            k: usize,
            n: usize,
            cur: &mut Vec<Option<usize>>,
            visit: &mut dyn FnMut(&[Option<usize>]),
            ok: &dyn Fn(usize, usize) -> bool,
            gts: usize,
        ) {
            if k == n {
                visit(cur);
                return;
            }
            cur[k] = None;
            rec(k + 1, n, cur, visit, ok, gts);
            for g in 0..gts {
                if ok(k, g) && !cur[..k].contains(&Some(g)) {
                    cur[k] = Some(g);
                    rec(k + 1, n, cur, visit, ok, gts);
                    cur[k] = None;
                }
            }
        }
        let mut visit = |a: &[Option<usize>]| {
            let key: Vec<(f64, i64)> = idx
                .iter()
                .map(|&p| match a[p] {
                    Some(g) => (iou(&preds[p].bbox, &gts[g].bbox), -(g as i64)),
                    None => (0.0, i64::MIN),
                })
                .collect();
            let better = match &best {
                None => true,
                Some((k, _)) => key.partial_cmp(k) == Some(std::cmp::Ordering::Greater),
            };
            if better {
                best = Some((key, a.to_vec()));
            }
        };
        rec(0, preds.len(), &mut cur, &mut visit, &ok, gts.len());
        best.map(|b| b.1).unwrap_or_default()
    }

    #[test]
    fn perfect_match() {
        let g = gt(10.0, 10.0, 50.0, 50.0);
        let m = match_detections(&[pred(g.bbox, 0.9)], &[g], 0.5);
        assert_eq!((m.tp(), m.fp(), m.fn_()), (1, 0, 0));
    }

    #[test]
    fn two_preds_one_gt() {
        let g = gt(0.0, 0.0, 100.0, 100.0);
        // IoU 0.9: 90x100 inside the gt.
        let near = BBox::new(0.0, 0.0, 90.0, 100.0);
        assert!((iou(&near, &g.bbox) - 0.9).abs() < 1e-12);
        let m = match_detections(&[pred(near, 0.7), pred(g.bbox, 0.95)], &[g], 0.5);
        assert_eq!(m.pred_gt, vec![None, Some(0)]);
        assert_eq!((m.tp(), m.fp(), m.fn_()), (1, 1, 0));
        // Higher confidence wins even with the worse box.
        let m = match_detections(&[pred(near, 0.99), pred(g.bbox, 0.95)], &[g], 0.5);
        assert_eq!(m.pred_gt, vec![Some(0), None]);
    }

    #[test]
    fn below_threshold() {
        let g = gt(0.0, 0.0, 100.0, 100.0);
        let p = BBox::new(0.0, 0.0, 40.0, 100.0);
        let m = match_detections(&[pred(p, 0.9)], &[g], 0.5);
        assert_eq!((m.tp(), m.fp(), m.fn_()), (0, 1, 1));
    }

    #[test]
    fn tie_goes_to_lower_gt_index() {
        let p = BBox::new(40.0, 0.0, 60.0, 10.0);
        let gts = [gt(30.0, 0.0, 50.0, 10.0), gt(50.0, 0.0, 70.0, 10.0)];
        let m = match_detections(&[pred(p, 0.9)], &gts, 0.1);
        assert_eq!(m.pred_gt, vec![Some(0)]);
    }

    #[test]
    fn class_mismatch_never_matches() {
        let g = GtBox {
            class_id: 1,
            ..gt(0.0, 0.0, 10.0, 10.0)
        };
        let m = match_detections(&[pred(g.bbox, 0.9)], &[g], 0.5);
        assert_eq!(m.tp(), 0);
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (0u8..20, 0u8..20, 1u8..12, 1u8..12)
            .prop_map(|(x, y, w, h)| BBox::new(x as f64, y as f64, (x + w) as f64, (y + h) as f64))
    }

    proptest! {
        #[test]
        fn one_to_one_and_agrees_with_oracle(
            preds in proptest::collection::vec((arb_box(), 0u8..5), 0..4),
            gts in proptest::collection::vec(arb_box(), 0..4),
            t in 0u8..10,
        ) {
            let preds: Vec<PredBox> = preds.into_iter().map(|(b, c)| pred(b, c as f64 / 4.0)).collect();
            let gts: Vec<GtBox> = gts.into_iter().map(|b| GtBox { bbox: b, class_id: 0, est_distance_ft: None }).collect();
            let t = t as f64 / 10.0;
            let m = match_detections(&preds, &gts, t);
            prop_assert_eq!(m.tp() + m.fn_(), gts.len());
            prop_assert_eq!(m.tp() + m.fp(), preds.len());
            for (pi, g) in m.pred_gt.iter().enumerate() {
                if let Some(g) = g {
                    prop_assert_eq!(m.gt_pred[*g], Some(pi));
                }
            }
            prop_assert_eq!(m.pred_gt, oracle(&preds, &gts, t));
        }
    }
}
