//! JSON-lines evaluation inputs. Mask paths are relative to the file that
//! names them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{area_ratio, AreaRatioSample, DetSegPrediction, GroundTruthInstance, MetricsError};
use crate::bbox::BBox;
use crate::error::FormatError;
use crate::formats::read_binary_mask;
use crate::raster::mask_iou;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionRecord {
    pub modal_mask: PathBuf,
    pub amodal_mask: PathBuf,
    pub occluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskPairRecord {
    pub pred_mask: PathBuf,
    pub gt_mask: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub image_id: String,
    pub category: String,
    pub score: f64,
    pub bbox: BBox,
    pub mask: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub category: String,
    pub bbox: BBox,
    #[serde(default)]
    pub amodal_mask: Option<PathBuf>,
}

/// Parsed records with their 1-based line numbers. Blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, MetricsError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| record_error(path, k + 1, e))?;
        out.push((k + 1, rec));
    }
    Ok(out)
}

fn record_error(path: &Path, line: usize, e: impl std::fmt::Display) -> MetricsError {
    MetricsError::Record {
        file: path.display().to_string(),
        line,
        message: e.to_string(),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}

pub fn load_area_ratios(path: &Path) -> Result<Vec<AreaRatioSample>, MetricsError> {
    read_jsonl::<OcclusionRecord>(path)?
        .into_iter()
        .map(|(line, r)| {
            let modal = read_binary_mask(&resolve(path, &r.modal_mask))?;
            let amodal = read_binary_mask(&resolve(path, &r.amodal_mask))?;
            let ratio = area_ratio(&modal, &amodal).map_err(|e| record_error(path, line, e))?;
            Ok(AreaRatioSample {
                ratio,
                occluded: r.occluded,
            })
        })
        .collect()
}

pub fn load_mask_ious(path: &Path) -> Result<Vec<f64>, MetricsError> {
    read_jsonl::<MaskPairRecord>(path)?
        .into_iter()
        .map(|(line, r)| {
            let p = read_binary_mask(&resolve(path, &r.pred_mask))?;
            let g = read_binary_mask(&resolve(path, &r.gt_mask))?;
            mask_iou(&p, &g).map_err(|e| record_error(path, line, e))
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> Result<Vec<DetSegPrediction>, MetricsError> {
    read_jsonl::<PredictionRecord>(path)?
        .into_iter()
        .map(|(line, r)| {
            let mask = read_binary_mask(&resolve(path, &r.mask))?;
            if mask.is_empty() {
                return Err(record_error(path, line, "prediction mask is empty"));
            }
            if !r.score.is_finite() {
                return Err(record_error(path, line, "score is not finite"));
            }
            Ok(DetSegPrediction {
                image_id: r.image_id,
                category: r.category,
                score: r.score,
                bbox: r.bbox,
                mask,
            })
        })
        .collect()
}

pub fn load_ground_truths(path: &Path) -> Result<Vec<GroundTruthInstance>, MetricsError> {
    read_jsonl::<GroundTruthRecord>(path)?
        .into_iter()
        .map(|(_, r)| {
            let amodal_mask = match &r.amodal_mask {
                Some(p) => Some(read_binary_mask(&resolve(path, p))?),
                None => None,
            };
            Ok(GroundTruthInstance {
                image_id: r.image_id,
                category: r.category,
                bbox: r.bbox,
                amodal_mask,
            })
        })
        .collect()
}
