//! Synthesis of amodal training examples from modal annotations.
//!
//! A main object is chosen, a patch box is cut around it, and zero or more
//! instances from other images are pasted on top using their modal masks as
//! hard alpha mattes. The supervision target comes from the *original* modal
//! annotation, so pixels the overlays hide stay positive. After every step
//! the visible share of the main object is checked; a step that drops it
//! below `visibility_min` is undone and redrawn.

mod composite;
mod manifest;
mod netio;
mod output;
mod sampler;
mod verify;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bbox::BBox;
use crate::error::{FormatError, RasterError};
use crate::raster::{bbox_of, BinaryMask, Image, TriLabelMask};

pub use composite::{assign_target_labels, place_overlay, Axis, Composite, OverlayPlacement};
pub use manifest::{
    dataset_mean_pixel, DatasetEntry, DatasetManifest, InstanceRecord, InstanceRef, ManifestFile, ManifestImage,
    ManifestInstance,
};
pub use netio::{modal_predictor_input, prepare_net_io, NetExample, NetIoOutcome, NET_INPUT_SIZE};
pub use output::{read_sample_meta, write_sample, SampleMeta};
pub use sampler::{jitter_box, jitter_box_ok, patch_box_ok, sample_patch_box};
pub use verify::{verify_sample_dir, SampleCheck};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("dataset has no images")]
    EmptyDataset,
    #[error("instance in image {0} has an empty modal mask")]
    EmptyInstance(String),
    #[error("main object has no pixels inside the patch")]
    EmptyObject,
    #[error("could not satisfy {0} constraints within the retry budget")]
    ConstraintUnsatisfiable(&'static str),
    #[error("sample generation failed after {0} restarts")]
    GenerationFailed(u32),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Per-axis share of the object box the patch box must cover.
    pub patch_overlap_min: f64,
    pub patch_size_min: f64,
    pub patch_size_max: f64,
    pub max_overlays: u32,
    /// Overlay scale is uniform on `mean ± halfwidth`.
    pub overlay_scale_mean: f64,
    pub overlay_scale_halfwidth: f64,
    pub visibility_min: f64,
    pub jitter_overlap_min: f64,
    pub jitter_size_tol: f64,
    /// When false, each main object always receives the same occlusion.
    pub dynamic_generation: bool,
    /// Attempts per operation before the sample is restarted.
    pub max_retries: u32,
    /// Whole-sample restarts before giving up.
    pub max_restarts: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            patch_overlap_min: 0.70,
            patch_size_min: 0.70,
            patch_size_max: 2.00,
            max_overlays: 2,
            overlay_scale_mean: 0.75,
            overlay_scale_halfwidth: 0.25,
            visibility_min: 0.30,
            jitter_overlap_min: 0.75,
            jitter_size_tol: 0.10,
            dynamic_generation: true,
            max_retries: 50,
            max_restarts: 10,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(DatagenError::InvalidConfig(format!("{name} = {v} must lie in (0, 1]")))
            }
        };
        unit("patch_overlap_min", self.patch_overlap_min)?;
        unit("patch_size_min", self.patch_size_min)?;
        unit("visibility_min", self.visibility_min)?;
        unit("overlay_scale_mean", self.overlay_scale_mean)?;
        unit("jitter_overlap_min", self.jitter_overlap_min)?;
        if !(self.patch_size_max > 0.0 && self.patch_size_max <= 4.0) {
            return Err(DatagenError::InvalidConfig(format!(
                "patch_size_max = {} must lie in (0, 4]",
                self.patch_size_max
            )));
        }
        if self.patch_size_min > self.patch_size_max {
            return Err(DatagenError::InvalidConfig("patch_size_min exceeds patch_size_max".into()));
        }
        if !(0.0..1.0).contains(&self.jitter_size_tol) {
            return Err(DatagenError::InvalidConfig(format!(
                "jitter_size_tol = {} must lie in [0, 1)",
                self.jitter_size_tol
            )));
        }
        if self.overlay_scale_halfwidth < 0.0 || self.overlay_scale_min() <= 0.0 {
            return Err(DatagenError::InvalidConfig("overlay scale range must be positive".into()));
        }
        if self.max_retries == 0 || self.max_restarts == 0 {
            return Err(DatagenError::InvalidConfig("retry budgets must be at least 1".into()));
        }
        Ok(())
    }

    pub fn overlay_scale_min(&self) -> f64 {
        self.overlay_scale_mean - self.overlay_scale_halfwidth
    }

    pub fn overlay_scale_max(&self) -> f64 {
        self.overlay_scale_mean + self.overlay_scale_halfwidth
    }
}

/// One synthesized training example. Masks and the target are in patch
/// coordinates; `patch_box` is in source-image coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSample {
    pub patch: Image,
    pub patch_box: BBox,
    /// Tight box of `visible_mask`, before jitter.
    pub visible_box: BBox,
    pub jittered_modal_box: BBox,
    pub target: TriLabelMask,
    pub visible_mask: BinaryMask,
    pub true_full_mask: BinaryMask,
    pub visible_fraction: f64,
    pub seed: u64,
    pub main_category: String,
    pub main_image_id: String,
    pub main_instance: usize,
    pub overlays: Vec<OverlayPlacement>,
}

/// Uniform image, then uniform instance within it.
pub fn sample_main_object<R: Rng + ?Sized>(manifest: &DatasetManifest, rng: &mut R) -> Result<InstanceRef, DatagenError> {
    if manifest.entries.is_empty() {
        return Err(DatagenError::EmptyDataset);
    }
    let image = rng.random_range(0..manifest.entries.len());
    let n = manifest.entries[image].instances.len();
    if n == 0 {
        return Err(DatagenError::EmptyDataset);
    }
    Ok(InstanceRef {
        image,
        instance: rng.random_range(0..n),
    })
}

/// Donors come from images other than the main object's whenever there are any.
fn sample_donor<R: Rng + ?Sized>(manifest: &DatasetManifest, main_image: usize, rng: &mut R) -> InstanceRef {
    let n = manifest.entries.len();
    let image = if n > 1 {
        let k = rng.random_range(0..n - 1);
        if k >= main_image {
            k + 1
        } else {
            k
        }
    } else {
        0
    };
    InstanceRef {
        image,
        instance: rng.random_range(0..manifest.entries[image].instances.len()),
    }
}

/// Stable per-object seed for fixed-configuration mode.
pub fn object_seed(image_id: &str, instance: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(image_id.as_bytes());
    h.update([0u8]);
    h.update((instance as u64).to_le_bytes());
    h.finalize().into()
}

struct Occlusion {
    patch_box: BBox,
    state: Composite,
    overlays: Vec<OverlayPlacement>,
}

/// Patch cut plus overlays. `Ok(None)` means a retry budget ran out and the
/// whole sample should restart.
fn build_occlusion<R: Rng + ?Sized>(
    manifest: &DatasetManifest,
    main_ref: InstanceRef,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<Option<Occlusion>, DatagenError> {
    let image = manifest.image(main_ref);
    let main = manifest.instance(main_ref);

    let mut cut = None;
    for _ in 0..cfg.max_retries {
        let patch_box = match sample_patch_box(&main.bbox(), image.width(), image.height(), cfg, rng) {
            Ok(b) => b,
            Err(DatagenError::ConstraintUnsatisfiable(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let state = Composite::cut(image, main, &patch_box);
        match state.visible_fraction() {
            Ok(f) if f >= cfg.visibility_min => {
                cut = Some((patch_box, state));
                break;
            }
            Ok(_) | Err(DatagenError::EmptyObject) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((patch_box, mut state)) = cut else {
        return Ok(None);
    };

    let n_overlays = rng.random_range(0..=cfg.max_overlays);
    let mut overlays = Vec::with_capacity(n_overlays as usize);
    for _ in 0..n_overlays {
        let mut placed = None;
        for _ in 0..cfg.max_retries {
            let donor_ref = sample_donor(manifest, main_ref.image, rng);
            let attempt = place_overlay(
                &state,
                manifest.image(donor_ref),
                manifest.instance(donor_ref),
                donor_ref.instance,
                cfg,
                rng,
            );
            let (next, placement) = match attempt {
                Ok(v) => v,
                Err(DatagenError::ConstraintUnsatisfiable(_)) => continue,
                Err(e) => return Err(e),
            };
            if next.visible_fraction()? >= cfg.visibility_min {
                placed = Some((next, placement));
                break;
            }
            // below the visibility floor: drop `next`, keeping `state` as it was
        }
        let Some((next, placement)) = placed else {
            return Ok(None);
        };
        state = next;
        overlays.push(placement);
    }
    Ok(Some(Occlusion {
        patch_box,
        state,
        overlays,
    }))
}

/// Synthesizes one example. The output is a pure function of
/// `(manifest, cfg, seed)`.
pub fn generate_example(manifest: &DatasetManifest, cfg: &GenConfig, seed: u64) -> Result<GenSample, DatagenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_restarts {
        let main_ref = sample_main_object(manifest, &mut rng)?;
        let main = manifest.instance(main_ref);
        let occlusion = if cfg.dynamic_generation {
            build_occlusion(manifest, main_ref, cfg, &mut rng)?
        } else {
            let mut fixed = ChaCha8Rng::from_seed(object_seed(&main.image_id, main_ref.instance));
            build_occlusion(manifest, main_ref, cfg, &mut fixed)?
        };
        let Some(Occlusion {
            patch_box,
            state,
            overlays,
        }) = occlusion
        else {
            continue;
        };

        let visible_box = bbox_of(&state.visible)?;
        let jittered = jitter_box(&visible_box, cfg, &mut rng);
        let others: Vec<&InstanceRecord> = manifest.entries[main_ref.image]
            .instances
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != main_ref.instance)
            .map(|(_, r)| r)
            .collect();
        let target = assign_target_labels(&patch_box, main, &others);
        let visible_fraction = state.visible_fraction()?;
        return Ok(GenSample {
            patch: state.patch,
            patch_box,
            visible_box,
            jittered_modal_box: jittered,
            target,
            visible_mask: state.visible,
            true_full_mask: state.truth,
            visible_fraction,
            seed,
            main_category: main.category.clone(),
            main_image_id: main.image_id.clone(),
            main_instance: main_ref.instance,
            overlays,
        });
    }
    Err(DatagenError::GenerationFailed(cfg.max_restarts))
}
