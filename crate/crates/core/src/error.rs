use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("degenerate box ({x0},{y0})-({x1},{y1})")]
    DegenerateBox { x0: i32, y0: i32, x1: i32, y1: i32 },
    #[error("cannot parse box {0:?}; expected x0,y0,x1,y1")]
    BadBoxSyntax(String),
    #[error("raster dimensions must be at least 1x1, got {0}x{1}")]
    InvalidDimensions(u32, u32),
    #[error("buffer holds {actual} elements but {expected} are required")]
    BufferLength { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("box {0} does not intersect the image")]
    BoxOutsideImage(crate::BBox),
    #[error("heatmap value {0} outside [0,1]")]
    HeatOutOfRange(f32),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

impl FormatError {
    pub(crate) fn invalid(path: &std::path::Path, message: impl Into<String>) -> Self {
        FormatError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}
