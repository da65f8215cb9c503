use serde::{Deserialize, Serialize};

use super::{Footprint, InferenceError, PredictRequest, PredictResponse, Predictor, PREDICTOR_SIZE};
use crate::bbox::{BBox, Rect};
use crate::error::RasterError;
use crate::raster::{BinaryMask, Grid, Heatmap, Image};
use crate::resample::{crop_resize, regrid, resample_heatmap, Interpolation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbbeParams {
    pub expansion_threshold: f64,
    pub margin_frac: f64,
    pub amodal_mask_threshold: f64,
    pub modal_mask_threshold: f64,
    pub max_iterations: u32,
}

impl Default for IbbeParams {
    fn default() -> Self {
        Self {
            expansion_threshold: 0.1,
            margin_frac: 0.125,
            amodal_mask_threshold: 0.7,
            modal_mask_threshold: 0.8,
            max_iterations: 20,
        }
    }
}

impl IbbeParams {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let open_unit = [
            ("expansion_threshold", self.expansion_threshold),
            ("amodal_mask_threshold", self.amodal_mask_threshold),
            ("modal_mask_threshold", self.modal_mask_threshold),
        ];
        for (name, v) in open_unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(InferenceError::InvalidParams(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(self.margin_frac > 0.0 && self.margin_frac < 0.5) {
            return Err(InferenceError::InvalidParams(format!(
                "margin_frac = {} must lie in (0, 0.5)",
                self.margin_frac
            )));
        }
        if self.max_iterations == 0 {
            return Err(InferenceError::InvalidParams("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// One expansion: the margin means measured on `box_before` and the sides
/// that grew.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionStep {
    pub iteration: u32,
    pub box_before: BBox,
    pub box_after: BBox,
    /// Up, down, left, right.
    pub margin_means: [f64; 4],
    pub expanded: Vec<Direction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IbbeResult {
    pub amodal_box: BBox,
    /// Image pixels covered by the final expanded footprint, clipped to the image.
    pub footprint_box: BBox,
    /// Final heatmap resampled onto `footprint_box`.
    pub amodal_heatmap: Heatmap,
    pub amodal_mask: BinaryMask,
    pub modal_mask: BinaryMask,
    pub iterations: u32,
    pub expansion_trace: Vec<ExpansionStep>,
    /// Margin means of the final prediction, up, down, left, right.
    pub final_margin_means: [f64; 4],
}

/// Raster width of the left/right and up/down margin strips of a
/// `width × height` response.
pub fn margin_strip_sizes(width: u32, height: u32, margin_frac: f64) -> (u32, u32) {
    let k = margin_frac / (1.0 + 2.0 * margin_frac);
    ((width as f64 * k).round() as u32, (height as f64 * k).round() as u32)
}

/// Mean heat in the margin strip on one side. Left and right strips span the
/// full height; up and down strips only the columns between them.
pub fn margin_mean_intensity(resp: &Heatmap, margin_frac: f64, dir: Direction) -> Result<f64, InferenceError> {
    let (w, h) = (resp.width(), resp.height());
    let (mx, my) = margin_strip_sizes(w, h, margin_frac);
    if mx == 0 || my == 0 || 2 * mx >= w || 2 * my >= h {
        return Err(InferenceError::EmptyStrip);
    }
    let (xs, ys) = match dir {
        Direction::Left => (0..mx, 0..h),
        Direction::Right => (w - mx..w, 0..h),
        Direction::Up => (mx..w - mx, 0..my),
        Direction::Down => (mx..w - mx, h - my..h),
    };
    let mut sum = 0.0f64;
    let mut n = 0u64;
    for y in ys {
        for x in xs.clone() {
            sum += resp.get(x, y) as f64;
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// The part of a response that lies over the inner box, resampled to
/// `out_w × out_h`.
pub fn inner_region(resp: &Heatmap, margin_frac: f64, out_w: u32, out_h: u32) -> Result<Heatmap, InferenceError> {
    let (w, h) = (resp.width(), resp.height());
    let (mx, my) = margin_strip_sizes(w, h, margin_frac);
    if 2 * mx >= w || 2 * my >= h {
        return Err(InferenceError::EmptyStrip);
    }
    let inner = BBox::new(mx as i32, my as i32, (w - mx) as i32, (h - my) as i32)?;
    let crop = Heatmap::from_grid_clamped(resp.crop(&inner, 0.0));
    Ok(resample_heatmap(&crop, out_w, out_h)?)
}

fn at_border(b: &BBox, dir: Direction, w: u32, h: u32) -> bool {
    match dir {
        Direction::Up => b.y0() <= 0,
        Direction::Down => b.y1() >= h as i32,
        Direction::Left => b.x0() <= 0,
        Direction::Right => b.x1() >= w as i32,
    }
}

fn step(dim: u32, margin_frac: f64) -> i32 {
    ((margin_frac * dim as f64).round() as i32).max(1)
}

fn grow(b: &BBox, dirs: &[Direction], margin_frac: f64, w: u32, h: u32) -> BBox {
    let sx = step(b.width(), margin_frac);
    let sy = step(b.height(), margin_frac);
    let (mut x0, mut y0, mut x1, mut y1) = (b.x0(), b.y0(), b.x1(), b.y1());
    for d in dirs {
        match d {
            Direction::Up => y0 = (y0 - sy).max(0),
            Direction::Down => y1 = (y1 + sy).min(h as i32),
            Direction::Left => x0 = (x0 - sx).max(0),
            Direction::Right => x1 = (x1 + sx).min(w as i32),
        }
    }
    BBox::new(x0, y0, x1, y1).expect("growing keeps the box non-degenerate")
}

struct Query {
    response: PredictResponse,
    modal_heatmap: Heatmap,
    footprint: Footprint,
}

struct Session<'a> {
    img: &'a Image,
    category: &'a str,
    margin_frac: f64,
    next_id: u64,
}

impl Session<'_> {
    fn request(&mut self, bx: &BBox, modal_heatmap: Heatmap) -> Result<PredictRequest, InferenceError> {
        let inner = Rect::from(*bx);
        let patch = crop_resize(self.img, bx, PREDICTOR_SIZE, PREDICTOR_SIZE, Interpolation::Bilinear, [0, 0, 0])?;
        let id = self.next_id;
        self.next_id += 1;
        Ok(PredictRequest {
            patch,
            modal_heatmap,
            category: self.category.to_string(),
            request_id: id,
            footprint: Some(Footprint {
                inner,
                expanded: inner.expand(self.margin_frac),
            }),
        })
    }

    fn call(&mut self, backend: &mut dyn Predictor, req: &PredictRequest) -> Result<PredictResponse, InferenceError> {
        let resp = backend.predict(req)?;
        if resp.request_id != req.request_id {
            return Err(InferenceError::Protocol(format!(
                "response id {} does not match request id {}",
                resp.request_id, req.request_id
            )));
        }
        Ok(resp)
    }

    fn query(
        &mut self,
        bx: &BBox,
        backend: &mut dyn Predictor,
        modal_backend: Option<&mut dyn Predictor>,
    ) -> Result<Query, InferenceError> {
        let neutral = Heatmap::constant(PREDICTOR_SIZE, PREDICTOR_SIZE, 0.5)?;
        let modal_heatmap = match modal_backend {
            Some(mb) => {
                let req = self.request(bx, neutral)?;
                let resp = self.call(mb, &req)?;
                inner_region(&resp.heatmap, mb.margin_frac(), PREDICTOR_SIZE, PREDICTOR_SIZE)?
            }
            None => neutral,
        };
        let req = self.request(bx, modal_heatmap.clone())?;
        let response = self.call(backend, &req)?;
        Ok(Query {
            response,
            modal_heatmap,
            footprint: req.footprint.expect("set by request"),
        })
    }
}

/// Heat of `grid` (covering `src`) at every pixel of `pixels`.
fn to_image_coords(grid: &Grid<f32>, src: Rect, pixels: &BBox) -> Result<Heatmap, RasterError> {
    let g = regrid(grid, src, Rect::from(*pixels), pixels.width(), pixels.height(), Interpolation::Bilinear, 0.0)?;
    Ok(Heatmap::from_grid_clamped(g))
}

fn threshold_into(mask: &mut BinaryMask, heat: &Heatmap, at: &BBox, thr: f64) {
    for (u, v) in heat.coords() {
        if heat.get(u, v) as f64 > thr {
            mask.set((at.x0() + u as i32) as u32, (at.y0() + v as i32) as u32, true);
        }
    }
}

/// Iterative Bounding Box Expansion starting from `modal_box`.
///
/// Each iteration predicts over the current box and grows it by one margin
/// step towards every side whose margin mean exceeds the threshold, unless
/// the box already touches that image border. `iterations` counts the
/// expansions, so the backend is queried `iterations + 1` times.
pub fn ibbe(
    img: &Image,
    modal_box: &BBox,
    category: &str,
    backend: &mut dyn Predictor,
    params: &IbbeParams,
    mut modal_backend: Option<&mut dyn Predictor>,
) -> Result<IbbeResult, InferenceError> {
    params.validate()?;
    if (backend.margin_frac() - params.margin_frac).abs() > 1e-9 {
        return Err(InferenceError::Protocol(format!(
            "backend margin_frac {} differs from the configured {}",
            backend.margin_frac(),
            params.margin_frac
        )));
    }
    let (w, h) = (img.width(), img.height());
    let start = modal_box
        .clip_to(w, h)
        .ok_or(RasterError::BoxOutsideImage(*modal_box))?;
    let mut session = Session {
        img,
        category,
        margin_frac: params.margin_frac,
        next_id: 0,
    };

    let mut bx = start;
    let mut trace = Vec::new();
    let mut modal_mask = BinaryMask::new(w, h, false)?;
    let (last, means) = loop {
        let q = session.query(&bx, backend, modal_backend.as_mut().map(|m| &mut **m as &mut dyn Predictor))?;
        if trace.is_empty() && bx == start {
            let heat = to_image_coords(&q.modal_heatmap, q.footprint.inner, &bx)?;
            threshold_into(&mut modal_mask, &heat, &bx, params.modal_mask_threshold);
        }
        let mut means = [0.0; 4];
        for (k, d) in Direction::ALL.into_iter().enumerate() {
            means[k] = margin_mean_intensity(&q.response.heatmap, params.margin_frac, d)?;
        }
        let dirs: Vec<Direction> = Direction::ALL
            .into_iter()
            .zip(means)
            .filter(|&(d, m)| m > params.expansion_threshold && !at_border(&bx, d, w, h))
            .map(|(d, _)| d)
            .collect();
        if dirs.is_empty() || trace.len() as u32 >= params.max_iterations {
            break (q, means);
        }
        let next = grow(&bx, &dirs, params.margin_frac, w, h);
        trace.push(ExpansionStep {
            iteration: trace.len() as u32,
            box_before: bx,
            box_after: next,
            margin_means: means,
            expanded: dirs,
        });
        bx = next;
    };

    let footprint_box = last
        .footprint
        .expanded
        .covered_pixels()
        .and_then(|b| b.clip_to(w, h))
        .unwrap_or(bx);
    let amodal_heatmap = to_image_coords(&last.response.heatmap, last.footprint.expanded, &footprint_box)?;
    let mut amodal_mask = BinaryMask::new(w, h, false)?;
    threshold_into(&mut amodal_mask, &amodal_heatmap, &footprint_box, params.amodal_mask_threshold);
    Ok(IbbeResult {
        amodal_box: bx,
        footprint_box,
        amodal_heatmap,
        amodal_mask,
        modal_mask,
        iterations: trace.len() as u32,
        expansion_trace: trace,
        final_margin_means: means,
    })
}
