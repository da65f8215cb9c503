use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_unit, AreaRatioSample, MetricsError};
use crate::bbox::{box_iou, BBox};
use crate::raster::{mask_iou, BinaryMask};

/// All-points interpolated AP of a sequence of (precision, recall) points
/// ordered by non-decreasing recall.
pub fn all_points_ap(precision: &[f64], recall: &[f64]) -> f64 {
    let mut mpre = Vec::with_capacity(precision.len() + 2);
    let mut mrec = Vec::with_capacity(recall.len() + 2);
    mpre.push(0.0);
    mrec.push(0.0);
    mpre.extend_from_slice(precision);
    mrec.extend_from_slice(recall);
    mpre.push(0.0);
    mrec.push(1.0);
    for i in (0..mpre.len() - 1).rev() {
        mpre[i] = mpre[i].max(mpre[i + 1]);
    }
    (0..mrec.len() - 1)
        .filter(|&i| mrec[i + 1] != mrec[i])
        .map(|i| (mrec[i + 1] - mrec[i]) * mpre[i + 1])
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// Ordered by increasing threshold.
    pub points: Vec<PrPoint>,
    pub average_precision: f64,
}

/// Precision/recall of the classifier "unoccluded iff ratio ≥ t" at every
/// distinct ratio `t`.
pub fn occlusion_pr(samples: &[AreaRatioSample]) -> Result<PrCurve, MetricsError> {
    for s in samples {
        check_unit(s.ratio)?;
    }
    let positives = samples.iter().filter(|s| !s.occluded).count();
    if positives == 0 {
        return Err(MetricsError::NoPositives);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].ratio;
        while i < sorted.len() && sorted[i].ratio == t {
            if sorted[i].occluded {
                fp += 1;
            } else {
                tp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold: t,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        });
    }
    let p: Vec<f64> = points.iter().map(|q| q.precision).collect();
    let r: Vec<f64> = points.iter().map(|q| q.recall).collect();
    let average_precision = all_points_ap(&p, &r);
    points.reverse();
    Ok(PrCurve {
        points,
        average_precision,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetSegPrediction {
    pub image_id: String,
    pub category: String,
    pub score: f64,
    pub bbox: BBox,
    pub mask: BinaryMask,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthInstance {
    pub image_id: String,
    pub category: String,
    pub bbox: BBox,
    /// `None` when the instance is not annotated with an amodal mask.
    pub amodal_mask: Option<BinaryMask>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryAp {
    /// `None` when the category has no annotated ground truth.
    pub ap: Option<f64>,
    pub annotated: usize,
    pub predictions: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    /// Predictions assigned to ground truths without an amodal mask.
    pub absorbed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub cutoff: f64,
    pub per_category: BTreeMap<String, CategoryAp>,
    /// Mean over categories with an AP.
    pub mean: Option<f64>,
}

/// mAP with box-overlap assignment and region-overlap correctness.
///
/// Within each category, predictions are taken by descending score (ties in
/// input order). Each is assigned to the unassigned ground truth in the same
/// image with the largest positive box IoU, first one on ties. It is a true
/// positive when that ground truth has an amodal mask with mask IoU ≥
/// `cutoff`. Assignment to an unannotated ground truth removes the
/// prediction from the ranking. Predictions of categories absent from `gts`
/// are ignored.
pub fn map_r(
    preds: &[DetSegPrediction],
    gts: &[GroundTruthInstance],
    cutoff: f64,
) -> Result<MapReport, MetricsError> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(MetricsError::OutOfRange(cutoff));
    }
    let mut categories: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (k, g) in gts.iter().enumerate() {
        categories.entry(&g.category).or_default().1.push(k);
    }
    for (k, p) in preds.iter().enumerate() {
        if let Some(e) = categories.get_mut(p.category.as_str()) {
            e.0.push(k);
        }
    }

    let mut per_category = BTreeMap::new();
    for (cat, (mut pk, gk)) in categories {
        pk.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
        let annotated = gk.iter().filter(|&&g| gts[g].amodal_mask.is_some()).count();
        let mut taken = vec![false; gk.len()];
        let (mut tp, mut fp, mut absorbed) = (0usize, 0usize, 0usize);
        let (mut precision, mut recall) = (Vec::new(), Vec::new());
        for &p in &pk {
            let pred = &preds[p];
            let mut best: Option<(usize, f64)> = None;
            for (slot, &g) in gk.iter().enumerate() {
                if taken[slot] || gts[g].image_id != pred.image_id {
                    continue;
                }
                let iou = box_iou(&pred.bbox, &gts[g].bbox);
                if iou > 0.0 && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((slot, iou));
                }
            }
            match best {
                Some((slot, _)) => {
                    taken[slot] = true;
                    match &gts[gk[slot]].amodal_mask {
                        Some(m) if mask_iou(&pred.mask, m)? >= cutoff => tp += 1,
                        Some(_) => fp += 1,
                        None => {
                            absorbed += 1;
                            continue;
                        }
                    }
                }
                None => fp += 1,
            }
            if annotated > 0 {
                precision.push(tp as f64 / (tp + fp) as f64);
                recall.push(tp as f64 / annotated as f64);
            }
        }
        let ap = (annotated > 0).then(|| all_points_ap(&precision, &recall));
        per_category.insert(
            cat.to_string(),
            CategoryAp {
                ap,
                annotated,
                predictions: pk.len(),
                true_positives: tp,
                false_positives: fp,
                absorbed,
            },
        );
    }
    let aps: Vec<f64> = per_category.values().filter_map(|c: &CategoryAp| c.ap).collect();
    let mean = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
    Ok(MapReport {
        cutoff,
        per_category,
        mean,
    })
}
