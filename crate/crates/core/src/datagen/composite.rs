//! Hard-alpha compositing of donor instances over a main-object patch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DatagenError, GenConfig};
use crate::bbox::BBox;
use crate::raster::{bbox_of, BinaryMask, Image, TriLabel, TriLabelMask};
use crate::resample::{resize_bilinear, resize_nearest};

use super::manifest::InstanceRecord;

/// A patch under construction. `truth` never changes once the patch is cut;
/// `visible` loses every pixel an overlay lands on.
#[derive(Clone, Debug, PartialEq)]
pub struct Composite {
    pub patch: Image,
    pub visible: BinaryMask,
    pub truth: BinaryMask,
}

impl Composite {
    /// Cuts `patch_box` (inside the image) out of the source image and the
    /// main object's modal mask.
    pub fn cut(image: &Image, main: &InstanceRecord, patch_box: &BBox) -> Self {
        let truth = main.modal_mask.crop(patch_box, false);
        Self {
            patch: image.crop(patch_box, [0, 0, 0]),
            visible: truth.clone(),
            truth,
        }
    }

    /// `|visible| / |truth|` over the patch.
    pub fn visible_fraction(&self) -> Result<f64, DatagenError> {
        let total = self.truth.count();
        if total == 0 {
            return Err(DatagenError::EmptyObject);
        }
        Ok(self.visible.count() as f64 / total as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Where and how one donor was pasted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayPlacement {
    pub donor_image_id: String,
    pub donor_instance: usize,
    /// Drawn target ratio of the overlay's shortest side to the same patch side.
    pub scale: f64,
    pub shortest_axis: Axis,
    /// Pasted extent in patch coordinates (may overhang the patch).
    pub bbox: BBox,
}

/// Pastes `donor` over `state` at a random scale and position. The donor's
/// modal mask, resized nearest-neighbour, is the alpha matte; its box is
/// placed to intersect the main object's current visible box.
pub fn place_overlay<R: Rng + ?Sized>(
    state: &Composite,
    donor_image: &Image,
    donor: &InstanceRecord,
    donor_instance: usize,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<(Composite, OverlayPlacement), DatagenError> {
    if donor.modal_mask.is_empty() {
        return Err(DatagenError::EmptyInstance(donor.image_id.clone()));
    }
    let vis_box = bbox_of(&state.visible).map_err(|_| DatagenError::ConstraintUnsatisfiable("overlay placement"))?;

    let src_box = donor.bbox();
    let src_img = donor_image.crop(&src_box, [0, 0, 0]);
    let src_mask = donor.modal_mask.crop(&src_box, false);
    let (pw, ph) = (state.patch.width() as f64, state.patch.height() as f64);
    let (dw, dh) = (src_box.width() as f64, src_box.height() as f64);

    let scale = rng.random_range(cfg.overlay_scale_min()..=cfg.overlay_scale_max());
    let (axis, k) = if dw <= dh {
        (Axis::X, scale * pw / dw)
    } else {
        (Axis::Y, scale * ph / dh)
    };
    let ow = ((dw * k).round() as u32).max(1);
    let oh = ((dh * k).round() as u32).max(1);
    let ov_img = resize_bilinear(&src_img, ow, oh)?;
    let ov_mask = resize_nearest(&src_mask, ow, oh)?;
    if ov_mask.is_empty() {
        return Err(DatagenError::ConstraintUnsatisfiable("overlay vanished when resized"));
    }

    // any top-left corner in these ranges gives a positive-area intersection with vis_box
    let px = rng.random_range(vis_box.x0() - ow as i32 + 1..=vis_box.x1() - 1);
    let py = rng.random_range(vis_box.y0() - oh as i32 + 1..=vis_box.y1() - 1);
    let placed = BBox::new(px, py, px + ow as i32, py + oh as i32).expect("overlay size is positive");

    let mut next = state.clone();
    for (x, y) in ov_mask.coords() {
        if !ov_mask.get(x, y) {
            continue;
        }
        let (tx, ty) = (px + x as i32, py + y as i32);
        if tx < 0 || ty < 0 || tx >= pw as i32 || ty >= ph as i32 {
            continue;
        }
        next.patch.set(tx as u32, ty as u32, ov_img.get(x, y));
        next.visible.set(tx as u32, ty as u32, false);
    }
    Ok((
        next,
        OverlayPlacement {
            donor_image_id: donor.image_id.clone(),
            donor_instance,
            scale,
            shortest_axis: axis,
            bbox: placed,
        },
    ))
}

/// Trilabel target over `patch_box`: positive on the main object's original
/// modal mask, unknown on other annotated instances of the same image,
/// negative elsewhere. Pasted overlays play no part.
pub fn assign_target_labels(patch_box: &BBox, main: &InstanceRecord, others: &[&InstanceRecord]) -> TriLabelMask {
    TriLabelMask::from_fn(patch_box.width(), patch_box.height(), |x, y| {
        let (sx, sy) = (patch_box.x0() + x as i32, patch_box.y0() + y as i32);
        if main.modal_mask.get_signed(sx, sy).unwrap_or(false) {
            TriLabel::Positive
        } else if others.iter().any(|o| o.modal_mask.get_signed(sx, sy).unwrap_or(false)) {
            TriLabel::Unknown
        } else {
            TriLabel::Negative
        }
    })
    .expect("patch box is non-degenerate")
}
