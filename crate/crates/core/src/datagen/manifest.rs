//! Modal instance annotations: the `manifest.json` schema and its loaded form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DatagenError;
use crate::bbox::BBox;
use crate::formats;
use crate::raster::{bbox_of, BinaryMask, Image, Rgb};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub mean_pixel: [f64; 3],
    pub categories: Vec<String>,
    pub images: Vec<ManifestImage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestImage {
    pub id: String,
    pub path: PathBuf,
    pub instances: Vec<ManifestInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInstance {
    pub category: String,
    pub mask_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occluded: Option<bool>,
}

/// One annotated object: its visible-region mask in full-image coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub image_id: String,
    pub category: String,
    pub modal_mask: BinaryMask,
    pub occluded: Option<bool>,
    bbox: BBox,
}

impl InstanceRecord {
    pub fn new(
        image_id: impl Into<String>,
        category: impl Into<String>,
        modal_mask: BinaryMask,
        occluded: Option<bool>,
    ) -> Result<Self, DatagenError> {
        let image_id = image_id.into();
        let bbox = bbox_of(&modal_mask).map_err(|_| DatagenError::EmptyInstance(image_id.clone()))?;
        Ok(Self {
            image_id,
            category: category.into(),
            modal_mask,
            occluded,
            bbox,
        })
    }

    /// Tightest box around the modal mask.
    pub fn bbox(&self) -> BBox {
        self.bbox
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetEntry {
    pub image_id: String,
    pub path: PathBuf,
    pub image: Image,
    pub instances: Vec<InstanceRecord>,
}

/// A loaded, validated manifest. Read-only once built.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub mean_pixel: [f64; 3],
    pub categories: Vec<String>,
    pub entries: Vec<DatasetEntry>,
}

impl DatasetManifest {
    pub fn new(mean_pixel: [f64; 3], categories: Vec<String>, entries: Vec<DatasetEntry>) -> Result<Self, DatagenError> {
        if entries.is_empty() {
            return Err(DatagenError::EmptyDataset);
        }
        for e in &entries {
            if e.instances.is_empty() {
                return Err(DatagenError::Manifest(format!("image {} has no instances", e.image_id)));
            }
            for inst in &e.instances {
                if inst.modal_mask.width() != e.image.width() || inst.modal_mask.height() != e.image.height() {
                    return Err(DatagenError::Manifest(format!(
                        "instance mask of image {} is {}x{} but the image is {}x{}",
                        e.image_id,
                        inst.modal_mask.width(),
                        inst.modal_mask.height(),
                        e.image.width(),
                        e.image.height()
                    )));
                }
                if !categories.contains(&inst.category) {
                    return Err(DatagenError::Manifest(format!(
                        "image {} uses unknown category {:?}",
                        e.image_id, inst.category
                    )));
                }
            }
        }
        Ok(Self {
            mean_pixel,
            categories,
            entries,
        })
    }

    /// Loads `manifest.json`; image and mask paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, DatagenError> {
        let text = fs::read_to_string(path).map_err(|e| DatagenError::Manifest(format!("{}: {e}", path.display())))?;
        let file: ManifestFile =
            serde_json::from_str(&text).map_err(|e| DatagenError::Manifest(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries = Vec::with_capacity(file.images.len());
        for img in &file.images {
            let image = formats::read_image(&base.join(&img.path))?;
            let mut instances = Vec::with_capacity(img.instances.len());
            for inst in &img.instances {
                let mask = formats::read_binary_mask(&base.join(&inst.mask_path))?;
                instances.push(InstanceRecord::new(img.id.clone(), inst.category.clone(), mask, inst.occluded)?);
            }
            entries.push(DatasetEntry {
                image_id: img.id.clone(),
                path: img.path.clone(),
                image,
                instances,
            });
        }
        Self::new(file.mean_pixel, file.categories, entries)
    }

    /// Writes `manifest.json` plus every image and mask under `dir`, using
    /// `images/<id>.png` and `masks/<id>_<k>.png`.
    pub fn save(&self, dir: &Path) -> Result<(), DatagenError> {
        fs::create_dir_all(dir.join("images")).map_err(io)?;
        fs::create_dir_all(dir.join("masks")).map_err(io)?;
        let mut images = Vec::new();
        for e in &self.entries {
            let rel = PathBuf::from("images").join(format!("{}.png", e.image_id));
            formats::write_image(&dir.join(&rel), &e.image)?;
            let mut instances = Vec::new();
            for (k, inst) in e.instances.iter().enumerate() {
                let mrel = PathBuf::from("masks").join(format!("{}_{k}.png", e.image_id));
                formats::write_binary_mask(&dir.join(&mrel), &inst.modal_mask)?;
                instances.push(ManifestInstance {
                    category: inst.category.clone(),
                    mask_path: mrel,
                    occluded: inst.occluded,
                });
            }
            images.push(ManifestImage {
                id: e.image_id.clone(),
                path: rel,
                instances,
            });
        }
        let file = ManifestFile {
            mean_pixel: self.mean_pixel,
            categories: self.categories.clone(),
            images,
        };
        let json = serde_json::to_string_pretty(&file).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), json + "\n").map_err(io)?;
        Ok(())
    }

    /// Mean pixel rounded to 8-bit channels.
    pub fn mean_rgb(&self) -> Rgb {
        self.mean_pixel.map(|c| c.round().clamp(0.0, 255.0) as u8)
    }

    pub fn instance(&self, r: InstanceRef) -> &InstanceRecord {
        &self.entries[r.image].instances[r.instance]
    }

    pub fn image(&self, r: InstanceRef) -> &Image {
        &self.entries[r.image].image
    }
}

fn io(e: std::io::Error) -> DatagenError {
    DatagenError::Manifest(e.to_string())
}

/// Dataset-wide mean RGB over every pixel of every image.
pub fn dataset_mean_pixel(images: &[&Image]) -> [f64; 3] {
    let mut sum = [0u64; 3];
    let mut n = 0u64;
    for img in images {
        for px in img.data() {
            for c in 0..3 {
                sum[c] += px[c] as u64;
            }
        }
        n += img.data().len() as u64;
    }
    if n == 0 {
        return [0.0; 3];
    }
    sum.map(|s| s as f64 / n as f64)
}

/// Position of an instance within a manifest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceRef {
    pub image: usize,
    pub instance: usize,
}
