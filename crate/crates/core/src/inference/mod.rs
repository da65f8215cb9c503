//! Amodal heatmap predictors and Iterative Bounding Box Expansion.
//!
//! A predictor receives the image patch under the current amodal box and
//! returns a heatmap over a larger footprint: the box grown by
//! `margin_frac` of its width on the left and right and of its height above
//! and below. [`ibbe`] keeps growing the box towards any side whose margin
//! strip is hot.

mod backends;
mod ibbe;
mod process;
pub mod protocol;

use thiserror::Error;

use crate::bbox::Rect;
use crate::error::RasterError;
use crate::raster::{Heatmap, Image};

pub use backends::{
    parse_backend_spec, BackendSpec, ConstantPredictor, ModalCopyPredictor, NullPredictor, OraclePredictor,
};
pub use ibbe::{
    ibbe, inner_region, margin_mean_intensity, margin_strip_sizes, Direction, ExpansionStep, IbbeParams, IbbeResult,
};
pub use process::{ProcessPredictor, DEFAULT_TIMEOUT};

/// Side length of predictor inputs and outputs.
pub const PREDICTOR_SIZE: u32 = 224;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("backend did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("margin strip is empty at this raster resolution")]
    EmptyStrip,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Image-space geometry of a request, available to in-process backends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footprint {
    /// The box whose contents form the patch.
    pub inner: Rect,
    /// The region the response heatmap must cover.
    pub expanded: Rect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictRequest {
    pub patch: Image,
    /// Modal heatmap aligned to `patch`.
    pub modal_heatmap: Heatmap,
    pub category: String,
    pub request_id: u64,
    /// Not carried over the wire.
    pub footprint: Option<Footprint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictResponse {
    /// Covers the request's expanded footprint.
    pub heatmap: Heatmap,
    pub request_id: u64,
}

/// A source of amodal heatmaps. Handles serve one request at a time.
pub trait Predictor {
    /// Margin, as a fraction of the input box, that responses extend past it.
    fn margin_frac(&self) -> f64;

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError>;
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn margin_frac(&self) -> f64 {
        (**self).margin_frac()
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        (**self).predict(req)
    }
}
