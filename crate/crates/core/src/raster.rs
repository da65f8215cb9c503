//! Row-major rasters: RGB images, binary masks, trilabel masks and heatmaps.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::error::RasterError;

pub type Rgb = [u8; 3];

/// A dense `width × height` raster stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

pub type Image = Grid<Rgb>;
pub type BinaryMask = Grid<bool>;
pub type TriLabelMask = Grid<TriLabel>;

impl<T: Copy> Grid<T> {
    pub fn new(width: u32, height: u32, fill: T) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![fill; width as usize * height as usize],
        })
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(RasterError::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> T) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn frame(&self) -> BBox {
        BBox::frame(self.width, self.height).expect("grid dimensions are non-zero")
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> T {
        self.data[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: T) {
        let i = self.index(x, y);
        self.data[i] = v;
    }

    /// Value at a possibly out-of-range coordinate.
    #[inline]
    pub fn get_signed(&self, x: i32, y: i32) -> Option<T> {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            None
        } else {
            Some(self.get(x as u32, y as u32))
        }
    }

    pub fn same_dims<U: Copy>(&self, other: &Grid<U>) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Copies the sub-raster under `bbox`; cells of `bbox` that fall outside
    /// this raster take `fill`.
    pub fn crop(&self, bbox: &BBox, fill: T) -> Grid<T> {
        Grid::from_fn(bbox.width(), bbox.height(), |x, y| {
            self.get_signed(bbox.x0() + x as i32, bbox.y0() + y as i32)
                .unwrap_or(fill)
        })
        .expect("box dimensions are non-zero")
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixel coordinates of every cell, row-major.
    pub fn coords(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (x, y)))
    }
}

fn check_dims(width: u32, height: u32) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::InvalidDimensions(width, height));
    }
    Ok(())
}

impl Grid<Rgb> {
    /// Builds an image from packed RGB bytes.
    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self, RasterError> {
        let expected = width as usize * height as usize * 3;
        if bytes.len() != expected {
            return Err(RasterError::BufferLength {
                expected,
                actual: bytes.len(),
            });
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Grid::from_vec(width, height, pixels)
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.data.iter().flatten().copied().collect()
    }
}

impl Grid<bool> {
    pub fn count(&self) -> u64 {
        self.data.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask, RasterError> {
        self.same_dims(other)?;
        Ok(self.zip_with(other, |a, b| a && b))
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask, RasterError> {
        self.same_dims(other)?;
        Ok(self.zip_with(other, |a, b| a || b))
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Number of set pixels inside `bbox` (cells outside the raster count as unset).
    pub fn count_in(&self, bbox: &BBox) -> u64 {
        let Some(clip) = bbox.clip_to(self.width, self.height) else {
            return 0;
        };
        let mut n = 0;
        for y in clip.y0()..clip.y1() {
            for x in clip.x0()..clip.x1() {
                n += self.get(x as u32, y as u32) as u64;
            }
        }
        n
    }
}

/// Supervision label of one target pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriLabel {
    Negative,
    Positive,
    Unknown,
}

impl TriLabel {
    pub fn to_byte(self) -> u8 {
        match self {
            TriLabel::Negative => 0,
            TriLabel::Positive => 1,
            TriLabel::Unknown => 255,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(TriLabel::Negative),
            1 => Some(TriLabel::Positive),
            255 => Some(TriLabel::Unknown),
            _ => None,
        }
    }
}

impl Grid<TriLabel> {
    /// Mask of pixels carrying `label`.
    pub fn select(&self, label: TriLabel) -> BinaryMask {
        self.map(|l| l == label)
    }
}

/// Per-pixel confidence, every value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap(Grid<f32>);

impl Heatmap {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self, RasterError> {
        Self::from_grid(Grid::from_vec(width, height, values)?)
    }

    pub fn from_grid(grid: Grid<f32>) -> Result<Self, RasterError> {
        if let Some(&bad) = grid.data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(RasterError::HeatOutOfRange(bad));
        }
        Ok(Heatmap(grid))
    }

    /// Clamps into `[0, 1]`; NaN becomes 0.
    pub fn from_grid_clamped(grid: Grid<f32>) -> Self {
        Heatmap(grid.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn constant(width: u32, height: u32, value: f32) -> Result<Self, RasterError> {
        Self::from_grid(Grid::new(width, height, value)?)
    }

    pub fn grid(&self) -> &Grid<f32> {
        &self.0
    }

    pub fn into_grid(self) -> Grid<f32> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.data.iter().map(|&v| v as f64).sum::<f64>() / self.0.data.len() as f64
    }
}

impl Deref for Heatmap {
    type Target = Grid<f32>;

    fn deref(&self) -> &Grid<f32> {
        &self.0
    }
}

/// Tightest box around the set pixels of `mask`.
pub fn bbox_of(mask: &BinaryMask) -> Result<BBox, RasterError> {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    let mut any = false;
    for (row, y) in mask.data.chunks_exact(mask.width as usize).zip(0u32..) {
        let Some(first) = row.iter().position(|&b| b) else {
            continue;
        };
        let last = row.iter().rposition(|&b| b).unwrap_or(first);
        any = true;
        x0 = x0.min(first as u32);
        x1 = x1.max(last as u32 + 1);
        y0 = y0.min(y);
        y1 = y + 1;
    }
    if !any {
        return Err(RasterError::EmptyMask);
    }
    BBox::new(x0 as i32, y0 as i32, x1 as i32, y1 as i32)
}

/// Pixel IoU; two empty masks are identical, so their IoU is 1.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64, RasterError> {
    a.same_dims(b)?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (&p, &q) in a.data.iter().zip(&b.data) {
        inter += (p && q) as u64;
        union += (p || q) as u64;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Pixels whose heat strictly exceeds `t`.
pub fn threshold_heatmap(h: &Heatmap, t: f32) -> BinaryMask {
    h.0.map(|v| v > t)
}
