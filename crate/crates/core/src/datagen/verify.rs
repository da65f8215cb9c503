//! Re-checks a written sample directory against its manifest.

use std::path::Path;

use serde::Serialize;

use super::{patch_box_ok, jitter_box_ok, read_sample_meta, DatagenError, DatasetManifest, GenConfig};
use crate::formats::{read_binary_mask, read_trilabel_mask};
use crate::raster::{bbox_of, TriLabel};

/// Which generator constraints a sample satisfies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampleCheck {
    pub patch_box: bool,
    pub visibility: bool,
    pub jitter: bool,
    /// POSITIVE target pixels are exactly the main object's modal mask.
    pub positives: bool,
    /// UNKNOWN exactly on other instances of the same image, NEGATIVE elsewhere.
    pub partition: bool,
}

impl SampleCheck {
    pub fn all(&self) -> bool {
        self.patch_box && self.visibility && self.jitter && self.positives && self.partition
    }
}

pub fn verify_sample_dir(manifest: &DatasetManifest, cfg: &GenConfig, dir: &Path) -> Result<SampleCheck, DatagenError> {
    let meta = read_sample_meta(dir)?;
    let entry = manifest
        .entries
        .iter()
        .find(|e| e.image_id == meta.main_image_id)
        .ok_or_else(|| DatagenError::Manifest(format!("unknown image {}", meta.main_image_id)))?;
    let main = entry
        .instances
        .get(meta.main_instance)
        .ok_or_else(|| DatagenError::Manifest(format!("unknown instance {}", meta.main_instance)))?;
    let target = read_trilabel_mask(&dir.join("target.png"))?;
    let visible = read_binary_mask(&dir.join("visible.png"))?;
    let truth = read_binary_mask(&dir.join("truth.png"))?;

    let vis_share = if truth.count() == 0 {
        0.0
    } else {
        visible.count() as f64 / truth.count() as f64
    };
    let vis_box_ok = bbox_of(&visible).map(|b| b == meta.visible_box).unwrap_or(false);

    let pb = meta.patch_box;
    let mut positives = truth.same_dims(&target).is_ok();
    let mut partition = positives;
    if positives {
        for (x, y) in target.coords() {
            let (ix, iy) = (pb.x0() + x as i32, pb.y0() + y as i32);
            let on_main = main.modal_mask.get_signed(ix, iy).unwrap_or(false);
            let on_other = entry
                .instances
                .iter()
                .enumerate()
                .any(|(k, r)| k != meta.main_instance && r.modal_mask.get_signed(ix, iy).unwrap_or(false));
            let label = target.get(x, y);
            positives &= (label == TriLabel::Positive) == on_main && truth.get(x, y) == on_main;
            let want = if on_main {
                TriLabel::Positive
            } else if on_other {
                TriLabel::Unknown
            } else {
                TriLabel::Negative
            };
            partition &= label == want;
        }
    }
    Ok(SampleCheck {
        patch_box: patch_box_ok(&pb, &main.bbox(), cfg),
        visibility: vis_share >= cfg.visibility_min && (vis_share - meta.visible_fraction).abs() < 1e-9,
        jitter: vis_box_ok && jitter_box_ok(&meta.jittered_modal_box, &meta.visible_box, cfg),
        positives,
        partition,
    })
}
