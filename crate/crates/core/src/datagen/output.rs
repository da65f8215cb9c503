//! Per-sample output directories.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatagenError, GenSample, OverlayPlacement};
use crate::bbox::BBox;
use crate::error::FormatError;
use crate::formats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub category: String,
    pub main_image_id: String,
    pub main_instance: usize,
    pub patch_box: BBox,
    pub visible_box: BBox,
    pub jittered_modal_box: BBox,
    pub visible_fraction: f64,
    pub overlays: Vec<OverlayPlacement>,
}

impl From<&GenSample> for SampleMeta {
    fn from(s: &GenSample) -> Self {
        Self {
            seed: s.seed,
            category: s.main_category.clone(),
            main_image_id: s.main_image_id.clone(),
            main_instance: s.main_instance,
            patch_box: s.patch_box,
            visible_box: s.visible_box,
            jittered_modal_box: s.jittered_modal_box,
            visible_fraction: s.visible_fraction,
            overlays: s.overlays.clone(),
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> DatagenError + '_ {
    move |source| {
        DatagenError::Format(FormatError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Writes `patch.png`, `target.png`, `visible.png`, `truth.png` and
/// `meta.json` into `dir`, creating it if needed.
pub fn write_sample(dir: &Path, s: &GenSample) -> Result<(), DatagenError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    formats::write_image(&dir.join("patch.png"), &s.patch)?;
    formats::write_trilabel_mask(&dir.join("target.png"), &s.target)?;
    formats::write_binary_mask(&dir.join("visible.png"), &s.visible_mask)?;
    formats::write_binary_mask(&dir.join("truth.png"), &s.true_full_mask)?;
    let meta = serde_json::to_string_pretty(&SampleMeta::from(s)).expect("meta serializes");
    let path = dir.join("meta.json");
    fs::write(&path, meta + "\n").map_err(io(&path))?;
    Ok(())
}

pub fn read_sample_meta(dir: &Path) -> Result<SampleMeta, DatagenError> {
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    serde_json::from_str(&text).map_err(|e| DatagenError::Manifest(format!("{}: {e}", path.display())))
}
