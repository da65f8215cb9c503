//! Random box samplers with per-axis overlap and size constraints.

use rand::Rng;

use super::{DatagenError, GenConfig};
use crate::bbox::{per_dim_overlap, BBox};

/// Smallest `k ≥ 1` with `k / len ≥ frac`, evaluated in the same floating
/// point arithmetic the constraint checks use.
pub(crate) fn min_len_at_least(frac: f64, len: u32) -> u32 {
    let l = len as f64;
    let mut k = ((frac * l).ceil() as u32).max(1);
    while k > 1 && (k - 1) as f64 / l >= frac {
        k -= 1;
    }
    while (k as f64 / l) < frac {
        k += 1;
    }
    k
}

/// Largest `k` with `k / len ≤ frac`.
pub(crate) fn max_len_at_most(frac: f64, len: u32) -> u32 {
    let l = len as f64;
    let mut k = (frac * l).floor().max(0.0) as u32;
    while ((k + 1) as f64 / l) <= frac {
        k += 1;
    }
    while k > 0 && (k as f64 / l) > frac {
        k -= 1;
    }
    k
}

/// Draws an interval `[s, s + n)` whose length lies in
/// `[size_lo, size_hi] × (r1 - r0)` and which covers at least
/// `overlap_min` of the reference interval `[r0, r1)`.
fn sample_interval<R: Rng + ?Sized>(
    rng: &mut R,
    r0: i32,
    r1: i32,
    size_lo: f64,
    size_hi: f64,
    overlap_min: f64,
) -> Option<(i32, i32)> {
    let len = (r1 - r0) as u32;
    let need = min_len_at_least(overlap_min, len);
    let lo = min_len_at_least(size_lo, len).max(need);
    let hi = max_len_at_most(size_hi, len);
    if lo > hi || need > len {
        return None;
    }
    let n = rng.random_range(lo..=hi) as i32;
    // every start in this range leaves at least `need` cells of overlap
    let s = rng.random_range(r0 + need as i32 - n..=r1 - need as i32);
    Some((s, s + n))
}

/// True when `b` meets the patch-box constraints relative to `obj`.
pub fn patch_box_ok(b: &BBox, obj: &BBox, cfg: &GenConfig) -> bool {
    let (fx, fy) = per_dim_overlap(b, obj);
    let rw = b.width() as f64 / obj.width() as f64;
    let rh = b.height() as f64 / obj.height() as f64;
    fx >= cfg.patch_overlap_min
        && fy >= cfg.patch_overlap_min
        && (cfg.patch_size_min..=cfg.patch_size_max).contains(&rw)
        && (cfg.patch_size_min..=cfg.patch_size_max).contains(&rh)
}

/// True when `b` meets the jitter constraints relative to `vis`.
pub fn jitter_box_ok(b: &BBox, vis: &BBox, cfg: &GenConfig) -> bool {
    let (fx, fy) = per_dim_overlap(b, vis);
    let rw = b.width() as f64 / vis.width() as f64;
    let rh = b.height() as f64 / vis.height() as f64;
    let (lo, hi) = (1.0 - cfg.jitter_size_tol, 1.0 + cfg.jitter_size_tol);
    fx >= cfg.jitter_overlap_min
        && fy >= cfg.jitter_overlap_min
        && (lo..=hi).contains(&rw)
        && (lo..=hi).contains(&rh)
}

/// Samples a patch box around `obj_box`, clipped to the image. A draw whose
/// clipped form violates the constraints is discarded and redrawn.
pub fn sample_patch_box<R: Rng + ?Sized>(
    obj_box: &BBox,
    image_w: u32,
    image_h: u32,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<BBox, DatagenError> {
    let unsat = || DatagenError::ConstraintUnsatisfiable("patch box");
    let (lo, hi) = (cfg.patch_size_min, cfg.patch_size_max);
    for _ in 0..cfg.max_retries {
        let (x0, x1) = sample_interval(rng, obj_box.x0(), obj_box.x1(), lo, hi, cfg.patch_overlap_min).ok_or_else(unsat)?;
        let (y0, y1) = sample_interval(rng, obj_box.y0(), obj_box.y1(), lo, hi, cfg.patch_overlap_min).ok_or_else(unsat)?;
        let raw = BBox::new(x0, y0, x1, y1).expect("sampled lengths are positive");
        if let Some(clipped) = raw.clip_to(image_w, image_h) {
            if patch_box_ok(&clipped, obj_box, cfg) {
                return Ok(clipped);
            }
        }
    }
    Err(unsat())
}

/// Perturbs the visible-object box. Every draw satisfies the constraints,
/// so the fallback to `vis_box` after `max_retries` is never expected.
pub fn jitter_box<R: Rng + ?Sized>(vis_box: &BBox, cfg: &GenConfig, rng: &mut R) -> BBox {
    let (lo, hi) = (1.0 - cfg.jitter_size_tol, 1.0 + cfg.jitter_size_tol);
    for _ in 0..cfg.max_retries.max(1) {
        let x = sample_interval(rng, vis_box.x0(), vis_box.x1(), lo, hi, cfg.jitter_overlap_min);
        let y = sample_interval(rng, vis_box.y0(), vis_box.y1(), lo, hi, cfg.jitter_overlap_min);
        if let (Some((x0, x1)), Some((y0, y1))) = (x, y) {
            let b = BBox::new(x0, y0, x1, y1).expect("sampled lengths are positive");
            if jitter_box_ok(&b, vis_box, cfg) {
                return b;
            }
        }
    }
    *vis_box
}
