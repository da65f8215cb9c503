//! Half-open integer pixel rectangles.
//!
//! A [`BBox`] covers columns `x0..x1` and rows `y0..y1`. Coordinates may be
//! negative or exceed a raster's extent; boxes that hang over the edge of an
//! image are legal and are clipped by the operations that read pixels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RasterError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i32; 4]", into = "[i32; 4]")]
pub struct BBox {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

impl BBox {
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Result<Self, RasterError> {
        if x1 <= x0 || y1 <= y0 {
            return Err(RasterError::DegenerateBox { x0, y0, x1, y1 });
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// The box covering a whole `width × height` raster.
    pub fn frame(width: u32, height: u32) -> Result<Self, RasterError> {
        Self::new(0, 0, width as i32, height as i32)
    }

    pub fn x0(&self) -> i32 {
        self.x0
    }

    pub fn y0(&self) -> i32 {
        self.y0
    }

    pub fn x1(&self) -> i32 {
        self.x1
    }

    pub fn y1(&self) -> i32 {
        self.y1
    }

    pub fn width(&self) -> u32 {
        (self.x1 - self.x0) as u32
    }

    pub fn height(&self) -> u32 {
        (self.y1 - self.y0) as u32
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains_point(&self, x: i32, y: i32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &BBox) -> bool {
        other.x0 >= self.x0 && other.y0 >= self.y0 && other.x1 <= self.x1 && other.y1 <= self.y1
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        BBox::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        )
        .ok()
    }

    /// Smallest box enclosing both.
    pub fn hull(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Intersection with the `width × height` raster plane.
    pub fn clip_to(&self, width: u32, height: u32) -> Option<BBox> {
        self.intersect(&BBox::frame(width, height).ok()?)
    }

    pub fn translate(&self, dx: i32, dy: i32) -> BBox {
        BBox {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    pub fn to_array(&self) -> [i32; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

impl TryFrom<[i32; 4]> for BBox {
    type Error = RasterError;

    fn try_from(v: [i32; 4]) -> Result<Self, Self::Error> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [i32; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.y0, self.x1, self.y1)
    }
}

impl std::str::FromStr for BBox {
    type Err = RasterError;

    /// Parses `x0,y0,x1,y1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i32> = s
            .split(',')
            .map(|p| p.trim().parse::<i32>())
            .collect::<Result<_, _>>()
            .map_err(|_| RasterError::BadBoxSyntax(s.to_string()))?;
        match parts.as_slice() {
            [x0, y0, x1, y1] => BBox::new(*x0, *y0, *x1, *y1),
            _ => Err(RasterError::BadBoxSyntax(s.to_string())),
        }
    }
}

/// Continuous axis-aligned rectangle in pixel units, used for footprints
/// whose edges fall between pixel boundaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Grows by `frac × width` on the left and right and `frac × height`
    /// above and below.
    pub fn expand(&self, frac: f64) -> Rect {
        let (dx, dy) = (frac * self.width(), frac * self.height());
        Rect {
            x0: self.x0 - dx,
            y0: self.y0 - dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    /// Integer pixels whose centres lie inside the rectangle, if any.
    pub fn covered_pixels(&self) -> Option<BBox> {
        let x0 = (self.x0 - 0.5).ceil() as i32;
        let y0 = (self.y0 - 0.5).ceil() as i32;
        let x1 = (self.x1 - 0.5).ceil() as i32;
        let y1 = (self.y1 - 0.5).ceil() as i32;
        BBox::new(x0, y0, x1, y1).ok()
    }
}

impl From<BBox> for Rect {
    fn from(b: BBox) -> Self {
        Rect {
            x0: b.x0 as f64,
            y0: b.y0 as f64,
            x1: b.x1 as f64,
            y1: b.y1 as f64,
        }
    }
}

fn interval_overlap(a0: i32, a1: i32, b0: i32, b1: i32) -> i64 {
    (a1.min(b1) as i64 - a0.max(b0) as i64).max(0)
}

/// Area intersection-over-union of two boxes; 0 when disjoint.
pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = interval_overlap(a.x0, a.x1, b.x0, b.x1) * interval_overlap(a.y0, a.y1, b.y0, b.y1);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() as i64 + b.area() as i64 - inter;
    inter as f64 / union as f64
}

/// Fraction of `reference`'s width and height covered by `a` along each axis.
pub fn per_dim_overlap(a: &BBox, reference: &BBox) -> (f64, f64) {
    let ix = interval_overlap(a.x0, a.x1, reference.x0, reference.x1);
    let iy = interval_overlap(a.y0, a.y1, reference.y0, reference.y1);
    (
        ix as f64 / reference.width() as f64,
        iy as f64 / reference.height() as f64,
    )
}
