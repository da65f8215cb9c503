//! Newline-delimited JSON framing spoken by out-of-process predictors.
//!
//! ```text
//! backend → {"type":"hello","protocol":1,"margin_frac":0.125}
//! client  → {"type":"predict","id":N,"category":"horse","width":224,"height":224,"patch_b64":"…","heatmap_b64":"…"}
//! backend → {"type":"heatmap","id":N,"width":224,"height":224,"values_b64":"…"}
//! client  → {"type":"shutdown"}
//! ```
//!
//! Patches are packed RGB bytes; heatmaps are little-endian `f32`. Both are
//! standard base64 with padding. A backend may answer a request with
//! `{"type":"error","id":N,"message":"…"}`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::raster::{Grid, Heatmap, Image};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum WireFrame {
    Hello {
        protocol: u32,
        margin_frac: f64,
    },
    Predict {
        id: u64,
        category: String,
        width: u32,
        height: u32,
        patch_b64: String,
        heatmap_b64: String,
    },
    Heatmap {
        id: u64,
        width: u32,
        height: u32,
        values_b64: String,
    },
    Shutdown {},
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    Hello { protocol: u32, margin_frac: f64 },
    Predict { id: u64, category: String, patch: Image, heatmap: Heatmap },
    Heatmap { id: u64, heatmap: Heatmap },
    Shutdown,
    Error { id: Option<u64>, message: String },
}

impl Frame {
    /// The `type` tag of this frame.
    pub fn kind(&self) -> &'static str {
        match self {
            Frame::Hello { .. } => "hello",
            Frame::Predict { .. } => "predict",
            Frame::Heatmap { .. } => "heatmap",
            Frame::Shutdown => "shutdown",
            Frame::Error { .. } => "error",
        }
    }
}

fn perr(msg: impl Into<String>) -> InferenceError {
    InferenceError::Protocol(msg.into())
}

fn b64(field: &str, s: &str) -> Result<Vec<u8>, InferenceError> {
    STANDARD.decode(s).map_err(|e| perr(format!("{field}: {e}")))
}

fn decode_floats(field: &str, bytes: &[u8], width: u32, height: u32) -> Result<Heatmap, InferenceError> {
    let n = width as usize * height as usize;
    if bytes.len() != n * 4 {
        return Err(perr(format!("{field}: {} bytes for a {width}x{height} heatmap", bytes.len())));
    }
    let values: Vec<f32> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let grid = Grid::from_vec(width, height, values).map_err(|e| perr(format!("{field}: {e}")))?;
    Heatmap::from_grid(grid).map_err(|e| perr(format!("{field}: {e}")))
}

fn encode_floats(h: &Heatmap) -> String {
    let bytes: Vec<u8> = h.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

/// Parses and validates one line (without its trailing newline).
pub fn decode(line: &str) -> Result<Frame, InferenceError> {
    let wire: WireFrame = serde_json::from_str(line).map_err(|e| perr(format!("malformed frame: {e}")))?;
    Ok(match wire {
        WireFrame::Hello { protocol, margin_frac } => {
            if !(margin_frac > 0.0 && margin_frac < 0.5) {
                return Err(perr(format!("margin_frac {margin_frac} outside (0, 0.5)")));
            }
            Frame::Hello { protocol, margin_frac }
        }
        WireFrame::Predict {
            id,
            category,
            width,
            height,
            patch_b64,
            heatmap_b64,
        } => {
            let patch = Image::from_rgb_bytes(width, height, &b64("patch_b64", &patch_b64)?)
                .map_err(|e| perr(format!("patch_b64: {e}")))?;
            let heatmap = decode_floats("heatmap_b64", &b64("heatmap_b64", &heatmap_b64)?, width, height)?;
            Frame::Predict {
                id,
                category,
                patch,
                heatmap,
            }
        }
        WireFrame::Heatmap {
            id,
            width,
            height,
            values_b64,
        } => Frame::Heatmap {
            id,
            heatmap: decode_floats("values_b64", &b64("values_b64", &values_b64)?, width, height)?,
        },
        WireFrame::Shutdown {} => Frame::Shutdown,
        WireFrame::Error { id, message } => Frame::Error { id, message },
    })
}

/// Serializes one frame as a single line, without the trailing newline.
pub fn encode(frame: &Frame) -> String {
    let wire = match frame {
        Frame::Hello { protocol, margin_frac } => WireFrame::Hello {
            protocol: *protocol,
            margin_frac: *margin_frac,
        },
        Frame::Predict {
            id,
            category,
            patch,
            heatmap,
        } => WireFrame::Predict {
            id: *id,
            category: category.clone(),
            width: patch.width(),
            height: patch.height(),
            patch_b64: STANDARD.encode(patch.to_rgb_bytes()),
            heatmap_b64: encode_floats(heatmap),
        },
        Frame::Heatmap { id, heatmap } => WireFrame::Heatmap {
            id: *id,
            width: heatmap.width(),
            height: heatmap.height(),
            values_b64: encode_floats(heatmap),
        },
        Frame::Shutdown => WireFrame::Shutdown {},
        Frame::Error { id, message } => WireFrame::Error {
            id: *id,
            message: message.clone(),
        },
    };
    serde_json::to_string(&wire).expect("frames serialize")
}
