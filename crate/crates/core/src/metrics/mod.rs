//! Occlusion-reasoning and amodal segmentation metrics.
//!
//! All average precisions use all-points interpolation: precision is
//! replaced by its running maximum from the right, then integrated over
//! recall.

mod ap;
pub mod records;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{FormatError, RasterError};
use crate::raster::BinaryMask;

pub use ap::{all_points_ap, map_r, occlusion_pr, CategoryAp, DetSegPrediction, GroundTruthInstance, MapReport, PrCurve, PrPoint};
pub use report::{accuracy_csv, histogram_csv, pr_curve_csv};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("amodal mask is empty, so the area ratio is undefined")]
    EmptyAmodalMask,
    #[error("no positive (unoccluded) samples")]
    NoPositives,
    #[error("no inputs")]
    EmptyInput,
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("record {line} of {file}: {message}")]
    Record { file: String, line: usize, message: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn check_unit(v: f64) -> Result<(), MetricsError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(MetricsError::OutOfRange(v))
    }
}

/// `|modal ∩ amodal| / |amodal|`.
pub fn area_ratio(modal: &BinaryMask, amodal: &BinaryMask) -> Result<f64, MetricsError> {
    let inter = modal.and(amodal)?.count();
    let total = amodal.count();
    if total == 0 {
        return Err(MetricsError::EmptyAmodalMask);
    }
    Ok(inter as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaRatioSample {
    pub ratio: f64,
    pub occluded: bool,
}

/// Bin index of `r` among `bins` equal-width bins on [0, 1]; 1.0 lands in
/// the last. Bin `k` is `[k / bins, (k + 1) / bins)` with the edges computed
/// in floating point, so e.g. 0.29 lands in bin 29 of 100 even though
/// `0.29 * 100` rounds below 29.
pub fn histogram_bin(r: f64, bins: usize) -> usize {
    let n = bins as f64;
    let mut k = ((r * n).floor().max(0.0) as usize).min(bins - 1);
    if k + 1 < bins && r >= (k + 1) as f64 / n {
        k += 1;
    } else if k > 0 && r < k as f64 / n {
        k -= 1;
    }
    k
}

pub fn ratio_histogram(ratios: &[f64], bins: usize) -> Result<Vec<u64>, MetricsError> {
    let bins = bins.max(1);
    let mut counts = vec![0u64; bins];
    for &r in ratios {
        check_unit(r)?;
        counts[histogram_bin(r, bins)] += 1;
    }
    Ok(counts)
}

pub const ACCURACY_GRID_STEPS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub cutoffs: Vec<f64>,
    /// Share of instances with IoU ≥ the matching cutoff.
    pub accuracy: Vec<f64>,
    /// Mean accuracy over the cutoff grid.
    pub auc: f64,
    pub acc_at_50: f64,
    pub acc_at_70: f64,
}

/// Cutoffs `0, 0.01, …, 1`.
pub fn accuracy_grid() -> Vec<f64> {
    (0..=ACCURACY_GRID_STEPS).map(|k| k as f64 / ACCURACY_GRID_STEPS as f64).collect()
}

pub fn accuracy_curve(ious: &[f64]) -> Result<AccuracyCurve, MetricsError> {
    if ious.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    for &v in ious {
        check_unit(v)?;
    }
    let mut sorted = ious.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let cutoffs = accuracy_grid();
    let accuracy: Vec<f64> = cutoffs
        .iter()
        .map(|&c| (sorted.len() - sorted.partition_point(|&v| v < c)) as f64 / n)
        .collect();
    let auc = accuracy.iter().sum::<f64>() / accuracy.len() as f64;
    Ok(AccuracyCurve {
        acc_at_50: accuracy[50],
        acc_at_70: accuracy[70],
        cutoffs,
        accuracy,
        auc,
    })
}
