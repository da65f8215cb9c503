//! Amodal instance segmentation toolkit.
//!
//! * `datagen` synthesizes amodal training examples from modal annotations
//!   by pasting other instances over a main object.
//! * `inference` runs Iterative Bounding Box Expansion over pluggable
//!   heatmap predictors, in-process or over a line-delimited JSON protocol.
//! * `metrics` scores occlusion reasoning and mask quality.

pub mod bbox;
pub mod datagen;
pub mod error;
pub mod formats;
pub mod inference;
pub mod metrics;
pub mod raster;
pub mod resample;
pub mod synthetic;

pub use bbox::{box_iou, per_dim_overlap, BBox, Rect};
pub use error::{FormatError, RasterError};
pub use raster::{bbox_of, mask_iou, threshold_heatmap, BinaryMask, Grid, Heatmap, Image, Rgb, TriLabel, TriLabelMask};
pub use resample::{crop_resize, resample_heatmap, Interpolation};
