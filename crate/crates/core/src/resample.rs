//! Resampling between raster grids.
//!
//! Pixel `i` of an `n`-cell axis is the unit interval `[i, i+1)` with its
//! centre at `i + 0.5`. Bilinear sampling interpolates between centres and
//! clamps at the outermost ones; nearest sampling picks the cell containing
//! the query point.

use crate::bbox::{BBox, Rect};
use crate::error::RasterError;
use crate::raster::{Grid, Heatmap, Image, Rgb};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    Bilinear,
}

/// Values that can be mixed by bilinear interpolation.
pub trait Blend: Copy {
    fn bilinear(p00: Self, p10: Self, p01: Self, p11: Self, tx: f64, ty: f64) -> Self;
}

#[inline]
fn lerp2(p00: f64, p10: f64, p01: f64, p11: f64, tx: f64, ty: f64) -> f64 {
    let top = p00 + (p10 - p00) * tx;
    let bottom = p01 + (p11 - p01) * tx;
    top + (bottom - top) * ty
}

impl Blend for f32 {
    fn bilinear(p00: f32, p10: f32, p01: f32, p11: f32, tx: f64, ty: f64) -> f32 {
        lerp2(p00 as f64, p10 as f64, p01 as f64, p11 as f64, tx, ty) as f32
    }
}

impl Blend for Rgb {
    fn bilinear(p00: Rgb, p10: Rgb, p01: Rgb, p11: Rgb, tx: f64, ty: f64) -> Rgb {
        let mut out = [0u8; 3];
        for c in 0..3 {
            let v = lerp2(p00[c] as f64, p10[c] as f64, p01[c] as f64, p11[c] as f64, tx, ty);
            out[c] = v.round().clamp(0.0, 255.0) as u8;
        }
        out
    }
}

/// Bilinear sample at continuous cell-index coordinates (`(0,0)` is the
/// centre of the first pixel), clamped to the outermost centres.
pub fn sample_bilinear<T: Blend>(g: &Grid<T>, fx: f64, fy: f64) -> T {
    let fx = fx.clamp(0.0, (g.width() - 1) as f64);
    let fy = fy.clamp(0.0, (g.height() - 1) as f64);
    let x0 = fx.floor() as u32;
    let y0 = fy.floor() as u32;
    let x1 = (x0 + 1).min(g.width() - 1);
    let y1 = (y0 + 1).min(g.height() - 1);
    T::bilinear(
        g.get(x0, y0),
        g.get(x1, y0),
        g.get(x0, y1),
        g.get(x1, y1),
        fx - x0 as f64,
        fy - y0 as f64,
    )
}

#[inline]
fn nearest_index(pos: f64, n: u32) -> u32 {
    (pos.floor().max(0.0) as u32).min(n - 1)
}

/// Nearest-neighbour resize; works for any cell type.
pub fn resize_nearest<T: Copy>(g: &Grid<T>, out_w: u32, out_h: u32) -> Result<Grid<T>, RasterError> {
    let sx = g.width() as f64 / out_w as f64;
    let sy = g.height() as f64 / out_h as f64;
    Grid::from_fn(out_w, out_h, |u, v| {
        g.get(
            nearest_index((u as f64 + 0.5) * sx, g.width()),
            nearest_index((v as f64 + 0.5) * sy, g.height()),
        )
    })
}

pub fn resize_bilinear<T: Blend>(g: &Grid<T>, out_w: u32, out_h: u32) -> Result<Grid<T>, RasterError> {
    let sx = g.width() as f64 / out_w as f64;
    let sy = g.height() as f64 / out_h as f64;
    Grid::from_fn(out_w, out_h, |u, v| {
        sample_bilinear(g, (u as f64 + 0.5) * sx - 0.5, (v as f64 + 0.5) * sy - 0.5)
    })
}

pub fn resize<T: Blend>(g: &Grid<T>, out_w: u32, out_h: u32, interp: Interpolation) -> Result<Grid<T>, RasterError> {
    match interp {
        Interpolation::Nearest => resize_nearest(g, out_w, out_h),
        Interpolation::Bilinear => resize_bilinear(g, out_w, out_h),
    }
}

/// Crops `bbox` out of `img` and resamples each axis independently to
/// `out_w × out_h`. Parts of the box beyond the image take `fill`.
pub fn crop_resize(
    img: &Image,
    bbox: &BBox,
    out_w: u32,
    out_h: u32,
    interp: Interpolation,
    fill: Rgb,
) -> Result<Image, RasterError> {
    if bbox.clip_to(img.width(), img.height()).is_none() {
        return Err(RasterError::BoxOutsideImage(*bbox));
    }
    let crop = img.crop(bbox, fill);
    resize(&crop, out_w, out_h, interp)
}

/// Bilinear resize of a heatmap; the output stays inside `[0, 1]`.
pub fn resample_heatmap(h: &Heatmap, out_w: u32, out_h: u32) -> Result<Heatmap, RasterError> {
    Ok(Heatmap::from_grid_clamped(resize_bilinear(h.grid(), out_w, out_h)?))
}

/// Re-grids a raster that covers `src_rect` (in some shared continuous frame)
/// onto an `out_w × out_h` raster covering `dst_rect`. Output cells whose
/// centres fall outside `src_rect` take `outside`.
pub fn regrid<T: Blend>(
    src: &Grid<T>,
    src_rect: Rect,
    dst_rect: Rect,
    out_w: u32,
    out_h: u32,
    interp: Interpolation,
    outside: T,
) -> Result<Grid<T>, RasterError> {
    let kx = src.width() as f64 / src_rect.width();
    let ky = src.height() as f64 / src_rect.height();
    let step_x = dst_rect.width() / out_w as f64;
    let step_y = dst_rect.height() / out_h as f64;
    Grid::from_fn(out_w, out_h, |u, v| {
        let px = dst_rect.x0 + (u as f64 + 0.5) * step_x;
        let py = dst_rect.y0 + (v as f64 + 0.5) * step_y;
        if px < src_rect.x0 || px >= src_rect.x1 || py < src_rect.y0 || py >= src_rect.y1 {
            return outside;
        }
        let cx = (px - src_rect.x0) * kx;
        let cy = (py - src_rect.y0) * ky;
        match interp {
            Interpolation::Nearest => src.get(nearest_index(cx, src.width()), nearest_index(cy, src.height())),
            Interpolation::Bilinear => sample_bilinear(src, cx - 0.5, cy - 0.5),
        }
    })
}
