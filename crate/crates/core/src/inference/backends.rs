use std::path::PathBuf;

use super::ibbe::margin_strip_sizes;
use super::{InferenceError, PredictRequest, PredictResponse, Predictor};
use crate::bbox::Rect;
use crate::raster::{BinaryMask, Grid, Heatmap};
use crate::resample::{regrid, resample_heatmap, Interpolation};

/// A `--backend` argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendSpec {
    Null,
    Oracle(PathBuf),
    ModalCopy,
    Process(String),
}

pub fn parse_backend_spec(s: &str) -> Result<BackendSpec, InferenceError> {
    match s {
        "null" => return Ok(BackendSpec::Null),
        "modal-copy" => return Ok(BackendSpec::ModalCopy),
        _ => {}
    }
    if let Some(p) = s.strip_prefix("oracle:").filter(|p| !p.is_empty()) {
        return Ok(BackendSpec::Oracle(p.into()));
    }
    if let Some(c) = s.strip_prefix("proc:").filter(|c| !c.trim().is_empty()) {
        return Ok(BackendSpec::Process(c.to_string()));
    }
    Err(InferenceError::InvalidParams(format!(
        "unknown backend {s:?}; expected null, modal-copy, oracle:<mask.png> or proc:<command>"
    )))
}

fn output_dims(req: &PredictRequest) -> (u32, u32) {
    (req.patch.width(), req.patch.height())
}

/// Answers every request with `value` everywhere.
#[derive(Clone, Debug)]
pub struct ConstantPredictor {
    value: f32,
    margin_frac: f64,
}

impl ConstantPredictor {
    pub fn new(value: f32, margin_frac: f64) -> Self {
        Self { value, margin_frac }
    }
}

impl Predictor for ConstantPredictor {
    fn margin_frac(&self) -> f64 {
        self.margin_frac
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        let (w, h) = output_dims(req);
        Ok(PredictResponse {
            heatmap: Heatmap::constant(w, h, self.value)?,
            request_id: req.request_id,
        })
    }
}

/// All-zero heatmaps.
#[derive(Clone, Debug)]
pub struct NullPredictor(ConstantPredictor);

impl NullPredictor {
    pub fn new(margin_frac: f64) -> Self {
        Self(ConstantPredictor::new(0.0, margin_frac))
    }
}

impl Default for NullPredictor {
    fn default() -> Self {
        Self::new(0.125)
    }
}

impl Predictor for NullPredictor {
    fn margin_frac(&self) -> f64 {
        self.0.margin_frac()
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        self.0.predict(req)
    }
}

/// Rasterizes a known image-space mask over each request's expanded
/// footprint, nearest neighbour. Pixels outside the image read as 0.
#[derive(Clone, Debug)]
pub struct OraclePredictor {
    truth: Grid<f32>,
    margin_frac: f64,
}

impl OraclePredictor {
    pub fn new(truth: BinaryMask, margin_frac: f64) -> Self {
        Self {
            truth: truth.map(|b| if b { 1.0 } else { 0.0 }),
            margin_frac,
        }
    }
}

impl Predictor for OraclePredictor {
    fn margin_frac(&self) -> f64 {
        self.margin_frac
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        let fp = req
            .footprint
            .ok_or_else(|| InferenceError::InvalidParams("oracle backend needs request geometry".into()))?;
        let (w, h) = output_dims(req);
        let frame = Rect::from(self.truth.frame());
        let g = regrid(&self.truth, frame, fp.expanded, w, h, Interpolation::Nearest, 0.0)?;
        Ok(PredictResponse {
            heatmap: Heatmap::from_grid(g)?,
            request_id: req.request_id,
        })
    }
}

/// Echoes the request's modal heatmap over the inner box and zero on the margin.
#[derive(Clone, Debug)]
pub struct ModalCopyPredictor {
    margin_frac: f64,
}

impl ModalCopyPredictor {
    pub fn new(margin_frac: f64) -> Self {
        Self { margin_frac }
    }
}

impl Default for ModalCopyPredictor {
    fn default() -> Self {
        Self::new(0.125)
    }
}

impl Predictor for ModalCopyPredictor {
    fn margin_frac(&self) -> f64 {
        self.margin_frac
    }

    fn predict(&mut self, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        let (w, h) = output_dims(req);
        let (mx, my) = margin_strip_sizes(w, h, self.margin_frac);
        if 2 * mx >= w || 2 * my >= h {
            return Err(InferenceError::EmptyStrip);
        }
        let inner = resample_heatmap(&req.modal_heatmap, w - 2 * mx, h - 2 * my)?;
        let g = Grid::from_fn(w, h, |x, y| {
            if x >= mx && x < w - mx && y >= my && y < h - my {
                inner.get(x - mx, y - my)
            } else {
                0.0
            }
        })?;
        Ok(PredictResponse {
            heatmap: Heatmap::from_grid(g)?,
            request_id: req.request_id,
        })
    }
}
