//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Nothing here calls the functions it checks.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use amodalforge_core::datagen::{DatasetManifest, GenConfig, GenSample};
use amodalforge_core::metrics::{AreaRatioSample, DetSegPrediction, GroundTruthInstance};
use amodalforge_core::{BBox, BinaryMask, TriLabel};
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn demo12() -> DatasetManifest {
    DatasetManifest::load(&fixture("demo12/manifest.json")).expect("bundled manifest loads")
}

// ---- geometry ----

/// Tight box of the set pixels, by scanning.
pub fn scan_bbox(m: &BinaryMask) -> Option<(i32, i32, i32, i32)> {
    let mut b: Option<(i32, i32, i32, i32)> = None;
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.get(x, y) {
                let (x, y) = (x as i32, y as i32);
                b = Some(match b {
                    None => (x, y, x + 1, y + 1),
                    Some((a, c, d, e)) => (a.min(x), c.min(y), d.max(x + 1), e.max(y + 1)),
                });
            }
        }
    }
    b
}

fn interval_overlap(a0: i32, a1: i32, b0: i32, b1: i32) -> i32 {
    (a0..a1).filter(|v| (b0..b1).contains(v)).count() as i32
}

/// Box IoU by counting integer cells.
pub fn cell_iou(a: &BBox, b: &BBox) -> f64 {
    let cells = |b: &BBox| -> Vec<(i32, i32)> {
        (b.y0()..b.y1()).flat_map(|y| (b.x0()..b.x1()).map(move |x| (x, y))).collect()
    };
    let ca = cells(a);
    let inter = ca.iter().filter(|&&(x, y)| b.contains_point(x, y)).count();
    let union = ca.len() + b.area() as usize - inter;
    inter as f64 / union as f64
}

pub fn count(m: &BinaryMask) -> usize {
    let mut n = 0;
    for y in 0..m.height() {
        for x in 0..m.width() {
            n += m.get(x, y) as usize;
        }
    }
    n
}

pub fn pixel_iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let (mut i, mut u) = (0usize, 0usize);
    for y in 0..a.height() {
        for x in 0..a.width() {
            i += (a.get(x, y) && b.get(x, y)) as usize;
            u += (a.get(x, y) || b.get(x, y)) as usize;
        }
    }
    if u == 0 {
        1.0
    } else {
        i as f64 / u as f64
    }
}

// ---- generator constraints ----

/// Every violated constraint of `s`, described.
pub fn generator_violations(m: &DatasetManifest, cfg: &GenConfig, s: &GenSample) -> Vec<String> {
    let mut bad = Vec::new();
    let entry = m.entries.iter().find(|e| e.image_id == s.main_image_id).unwrap();
    let main = &entry.instances[s.main_instance];
    let (ox0, oy0, ox1, oy1) = scan_bbox(&main.modal_mask).unwrap();
    let (ow, oh) = (ox1 - ox0, oy1 - oy0);
    let p = s.patch_box;
    let (pw, ph) = (p.x1() - p.x0(), p.y1() - p.y0());

    let fx = interval_overlap(p.x0(), p.x1(), ox0, ox1) as f64 / ow as f64;
    let fy = interval_overlap(p.y0(), p.y1(), oy0, oy1) as f64 / oh as f64;
    if fx < cfg.patch_overlap_min || fy < cfg.patch_overlap_min {
        bad.push(format!("patch overlap {fx:.3}x{fy:.3}"));
    }
    for r in [pw as f64 / ow as f64, ph as f64 / oh as f64] {
        if r < cfg.patch_size_min || r > cfg.patch_size_max {
            bad.push(format!("patch size ratio {r:.3}"));
        }
    }
    if p.x0() < 0 || p.y0() < 0 || p.x1() > entry.image.width() as i32 || p.y1() > entry.image.height() as i32 {
        bad.push("patch leaves the image".into());
    }
    if s.patch.width() as i32 != pw || s.patch.height() as i32 != ph {
        bad.push("patch raster size".into());
    }

    let truth = count(&s.true_full_mask);
    let vis = count(&s.visible_mask);
    let frac = vis as f64 / truth as f64;
    if frac < cfg.visibility_min || (frac - s.visible_fraction).abs() > 1e-12 {
        bad.push(format!("visible fraction {frac:.3} (reported {:.3})", s.visible_fraction));
    }

    let Some((vx0, vy0, vx1, vy1)) = scan_bbox(&s.visible_mask) else {
        bad.push("nothing visible".into());
        return bad;
    };
    if s.visible_box.to_array() != [vx0, vy0, vx1, vy1] {
        bad.push("visible box".into());
    }
    let j = s.jittered_modal_box;
    let (vw, vh) = (vx1 - vx0, vy1 - vy0);
    let jx = interval_overlap(j.x0(), j.x1(), vx0, vx1) as f64 / vw as f64;
    let jy = interval_overlap(j.y0(), j.y1(), vy0, vy1) as f64 / vh as f64;
    if jx < cfg.jitter_overlap_min || jy < cfg.jitter_overlap_min {
        bad.push(format!("jitter overlap {jx:.3}x{jy:.3}"));
    }
    let dw = ((j.x1() - j.x0()) - vw).abs() as f64 / vw as f64;
    let dh = ((j.y1() - j.y0()) - vh).abs() as f64 / vh as f64;
    if dw > cfg.jitter_size_tol + 1e-12 || dh > cfg.jitter_size_tol + 1e-12 {
        bad.push(format!("jitter size delta {dw:.3}x{dh:.3}"));
    }

    let mut positives_ok = true;
    let mut partition_ok = true;
    for y in 0..ph as u32 {
        for x in 0..pw as u32 {
            let (ix, iy) = (p.x0() + x as i32, p.y0() + y as i32);
            let on_main = main.modal_mask.get(ix as u32, iy as u32);
            let on_other = entry
                .instances
                .iter()
                .enumerate()
                .any(|(k, r)| k != s.main_instance && r.modal_mask.get(ix as u32, iy as u32));
            let want = if on_main {
                TriLabel::Positive
            } else if on_other {
                TriLabel::Unknown
            } else {
                TriLabel::Negative
            };
            let got = s.target.get(x, y);
            partition_ok &= got == want;
            positives_ok &= (got == TriLabel::Positive) == on_main && s.true_full_mask.get(x, y) == on_main;
            if s.visible_mask.get(x, y) && !s.true_full_mask.get(x, y) {
                positives_ok = false;
            }
        }
    }
    if !partition_ok {
        bad.push("trilabel partition".into());
    }
    if !positives_ok {
        bad.push("positive set differs from the modal mask".into());
    }
    bad
}

// ---- metric oracles ----

pub fn area_ratio_oracle(modal: &BinaryMask, amodal: &BinaryMask) -> Option<f64> {
    let (mut i, mut a) = (0usize, 0usize);
    for y in 0..amodal.height() {
        for x in 0..amodal.width() {
            if amodal.get(x, y) {
                a += 1;
                i += modal.get(x, y) as usize;
            }
        }
    }
    (a > 0).then(|| i as f64 / a as f64)
}

/// AP from the ranked outcome list: each true positive adds `1 / n_pos`
/// times the best precision at or after it.
fn ranked_ap(outcomes: &[bool], n_pos: usize) -> f64 {
    let mut prec = Vec::new();
    let mut tp = 0;
    for (k, &o) in outcomes.iter().enumerate() {
        tp += o as usize;
        prec.push(tp as f64 / (k + 1) as f64);
    }
    let mut ap = 0.0;
    for k in 0..outcomes.len() {
        if outcomes[k] {
            let best = prec[k..].iter().cloned().fold(0.0, f64::max);
            ap += best / n_pos as f64;
        }
    }
    ap
}

/// Threshold-sweep PR points (threshold, precision, recall), ascending
/// threshold, and the AP.
/// (threshold, precision, recall)
pub type SweepPoint = (f64, f64, f64);

pub fn occlusion_pr_oracle(samples: &[AreaRatioSample]) -> Option<(Vec<SweepPoint>, f64)> {
    let n_pos = samples.iter().filter(|s| !s.occluded).count();
    if n_pos == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let mut points = Vec::new();
    for &t in &thresholds {
        let tp = samples.iter().filter(|s| !s.occluded && s.ratio >= t).count();
        let fp = samples.iter().filter(|s| s.occluded && s.ratio >= t).count();
        points.push((t, tp as f64 / (tp + fp) as f64, tp as f64 / n_pos as f64));
    }
    // interpolated precision at each recall level, summed over recall steps
    let mut ap = 0.0;
    for (i, &(_, _, r)) in points.iter().enumerate() {
        let prev_r = if i + 1 < points.len() { points[i + 1].2 } else { 0.0 };
        if r > prev_r {
            let best = points.iter().filter(|q| q.2 >= r).map(|q| q.1).fold(0.0, f64::max);
            ap += (r - prev_r) * best;
        }
    }
    Some((points, ap))
}

pub fn histogram_oracle(ratios: &[f64], bins: usize) -> Vec<u64> {
    (0..bins)
        .map(|k| {
            let lo = k as f64 / bins as f64;
            let hi = (k + 1) as f64 / bins as f64;
            ratios
                .iter()
                .filter(|&&r| r >= lo && (r < hi || (k == bins - 1 && r <= 1.0)))
                .count() as u64
        })
        .collect()
}

/// Counts of IoU ≥ cutoff for cutoffs k/100, and their mean share.
pub fn accuracy_oracle(ious: &[f64]) -> (Vec<usize>, f64) {
    let counts: Vec<usize> = (0..=100)
        .map(|k| ious.iter().filter(|&&v| v >= k as f64 / 100.0).count())
        .collect();
    let auc = counts.iter().map(|&c| c as f64 / ious.len() as f64).sum::<f64>() / 101.0;
    (counts, auc)
}

pub struct MapOracle {
    pub per_category: BTreeMap<String, Option<f64>>,
    pub tp: BTreeMap<String, usize>,
    pub mean: Option<f64>,
}

/// Greedy assignment simulated step by step.
pub fn map_r_oracle(preds: &[DetSegPrediction], gts: &[GroundTruthInstance], cutoff: f64) -> MapOracle {
    let mut cats: Vec<&str> = gts.iter().map(|g| g.category.as_str()).collect();
    cats.sort();
    cats.dedup();
    let mut per_category = BTreeMap::new();
    let mut tps = BTreeMap::new();
    for cat in cats {
        let mut pending: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].category == cat).collect();
        let mut used = vec![false; gts.len()];
        let n_pos = gts.iter().filter(|g| g.category == cat && g.amodal_mask.is_some()).count();
        let mut outcomes = Vec::new();
        while !pending.is_empty() {
            // highest score, earliest input on ties
            let mut pick = 0;
            for k in 1..pending.len() {
                if preds[pending[k]].score > preds[pending[pick]].score {
                    pick = k;
                }
            }
            let p = &preds[pending.remove(pick)];
            let mut best: Option<(usize, f64)> = None;
            for (g, gt) in gts.iter().enumerate() {
                if used[g] || gt.category != cat || gt.image_id != p.image_id {
                    continue;
                }
                let iou = cell_iou(&p.bbox, &gt.bbox);
                if iou > 0.0 && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((g, iou));
                }
            }
            match best {
                None => outcomes.push(false),
                Some((g, _)) => {
                    used[g] = true;
                    match &gts[g].amodal_mask {
                        None => {}
                        Some(m) => outcomes.push(pixel_iou(&p.mask, m) >= cutoff),
                    }
                }
            }
        }
        tps.insert(cat.to_string(), outcomes.iter().filter(|&&o| o).count());
        per_category.insert(cat.to_string(), (n_pos > 0).then(|| ranked_ap(&outcomes, n_pos)));
    }
    let aps: Vec<f64> = per_category.values().flatten().cloned().collect();
    let mean = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
    MapOracle {
        per_category,
        tp: tps,
        mean,
    }
}

// ---- random instances ----

pub fn random_mask<R: Rng>(rng: &mut R, w: u32, h: u32, p: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(p)).unwrap()
}

pub fn random_box<R: Rng>(rng: &mut R, w: i32, h: i32) -> BBox {
    let x0 = rng.random_range(0..w);
    let y0 = rng.random_range(0..h);
    BBox::new(x0, y0, rng.random_range(x0 + 1..=w), rng.random_range(y0 + 1..=h)).unwrap()
}

pub fn box_mask(b: &BBox, w: u32, h: u32) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| b.contains_point(x as i32, y as i32)).unwrap()
}

/// At most 10 predictions and 5 ground truths over two images and two
/// categories, with coarse scores so ties occur.
pub fn random_detseg<R: Rng>(rng: &mut R) -> (Vec<DetSegPrediction>, Vec<GroundTruthInstance>) {
    const W: u32 = 12;
    let cats = ["a", "b"];
    let imgs = ["i0", "i1"];
    let n_gt = rng.random_range(0..=5);
    let gts: Vec<GroundTruthInstance> = (0..n_gt)
        .map(|_| {
            let b = random_box(rng, W as i32, W as i32);
            let amodal_mask = if rng.random_bool(0.8) {
                let mut m = box_mask(&b, W, W);
                for (x, y) in m.coords().collect::<Vec<_>>() {
                    if m.get(x, y) && rng.random_bool(0.15) {
                        m.set(x, y, false);
                    }
                }
                Some(m)
            } else {
                None
            };
            GroundTruthInstance {
                image_id: imgs[rng.random_range(0..2)].into(),
                category: cats[rng.random_range(0..2)].into(),
                bbox: b,
                amodal_mask,
            }
        })
        .collect();
    let n_pred = rng.random_range(0..=10);
    let preds = (0..n_pred)
        .map(|_| {
            let (bbox, image_id, category) = if !gts.is_empty() && rng.random_bool(0.7) {
                let g = &gts[rng.random_range(0..gts.len())];
                let j = |v: i32, rng: &mut R| (v + rng.random_range(-2..=2)).clamp(0, W as i32);
                let (x0, y0) = (j(g.bbox.x0(), rng), j(g.bbox.y0(), rng));
                let (x1, y1) = (j(g.bbox.x1(), rng).max(x0 + 1), j(g.bbox.y1(), rng).max(y0 + 1));
                let b = BBox::new(x0, y0, x1, y1).unwrap();
                (b, g.image_id.clone(), g.category.clone())
            } else {
                (
                    random_box(rng, W as i32, W as i32),
                    imgs[rng.random_range(0..2)].to_string(),
                    cats[rng.random_range(0..2)].to_string(),
                )
            };
            let mut mask = box_mask(&bbox, W, W);
            for (x, y) in mask.coords().collect::<Vec<_>>() {
                if rng.random_bool(0.1) {
                    mask.set(x, y, !mask.get(x, y));
                }
            }
            DetSegPrediction {
                image_id,
                category,
                score: rng.random_range(0..8) as f64 / 8.0,
                bbox,
                mask,
            }
        })
        .collect();
    (preds, gts)
}
