//! On-disk raster formats.
//!
//! Masks are 8-bit single-channel PNGs: 0 = negative, 1 = positive,
//! 255 = unknown (binary masks use only 0 and 1). Heatmaps are `.hmap`
//! blobs: `u32` width, `u32` height, then `width × height` `f32` values,
//! all little-endian, row-major.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, RgbImage};

use crate::error::FormatError;
use crate::raster::{BinaryMask, Grid, Heatmap, Image, TriLabel, TriLabelMask};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn img_err(path: &Path) -> impl FnOnce(image::ImageError) -> FormatError + '_ {
    move |source| FormatError::Image {
        path: path.to_path_buf(),
        source,
    }
}

fn encode_png(img: image::DynamicImage, path: &Path) -> Result<Vec<u8>, FormatError> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).map_err(img_err(path))?;
    Ok(buf.into_inner())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_image(path: &Path) -> Result<Image, FormatError> {
    let dynimg = image::open(path).map_err(img_err(path))?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(Image::from_rgb_bytes(w, h, rgb.as_raw())?)
}

pub fn encode_image_png(img: &Image) -> Result<Vec<u8>, FormatError> {
    let buf = RgbImage::from_raw(img.width(), img.height(), img.to_rgb_bytes())
        .expect("buffer length matches dimensions");
    encode_png(buf.into(), Path::new("<memory>"))
}

pub fn write_image(path: &Path, img: &Image) -> Result<(), FormatError> {
    write_bytes(path, &encode_image_png(img)?)
}

fn read_gray(path: &Path) -> Result<GrayImage, FormatError> {
    let dynimg = image::open(path).map_err(img_err(path))?;
    match dynimg {
        image::DynamicImage::ImageLuma8(g) => Ok(g),
        other => Err(FormatError::invalid(
            path,
            format!("expected 8-bit single-channel PNG, found {:?}", other.color()),
        )),
    }
}

fn gray_png(width: u32, height: u32, bytes: Vec<u8>) -> Result<Vec<u8>, FormatError> {
    let g = GrayImage::from_raw(width, height, bytes).expect("buffer length matches dimensions");
    encode_png(g.into(), Path::new("<memory>"))
}

pub fn read_binary_mask(path: &Path) -> Result<BinaryMask, FormatError> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    let mut bits = Vec::with_capacity(g.as_raw().len());
    for &b in g.as_raw() {
        match b {
            0 => bits.push(false),
            1 => bits.push(true),
            other => {
                return Err(FormatError::invalid(
                    path,
                    format!("binary mask holds value {other}; only 0 and 1 are allowed"),
                ))
            }
        }
    }
    Ok(BinaryMask::from_vec(w, h, bits)?)
}

pub fn encode_binary_mask_png(mask: &BinaryMask) -> Result<Vec<u8>, FormatError> {
    gray_png(mask.width(), mask.height(), mask.data().iter().map(|&b| b as u8).collect())
}

pub fn write_binary_mask(path: &Path, mask: &BinaryMask) -> Result<(), FormatError> {
    write_bytes(path, &encode_binary_mask_png(mask)?)
}

pub fn read_trilabel_mask(path: &Path) -> Result<TriLabelMask, FormatError> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    let labels = g
        .as_raw()
        .iter()
        .map(|&b| {
            TriLabel::from_byte(b)
                .ok_or_else(|| FormatError::invalid(path, format!("trilabel mask holds value {b}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TriLabelMask::from_vec(w, h, labels)?)
}

pub fn encode_trilabel_png(mask: &TriLabelMask) -> Result<Vec<u8>, FormatError> {
    gray_png(mask.width(), mask.height(), mask.data().iter().map(|l| l.to_byte()).collect())
}

pub fn write_trilabel_mask(path: &Path, mask: &TriLabelMask) -> Result<(), FormatError> {
    write_bytes(path, &encode_trilabel_png(mask)?)
}

pub fn encode_heatmap(h: &Heatmap) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + h.data().len() * 4);
    out.extend_from_slice(&h.width().to_le_bytes());
    out.extend_from_slice(&h.height().to_le_bytes());
    for v in h.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_heatmap(bytes: &[u8], path: &Path) -> Result<Heatmap, FormatError> {
    if bytes.len() < 8 {
        return Err(FormatError::invalid(path, "heatmap header truncated"));
    }
    let w = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n = w as u64 * h as u64;
    if (bytes.len() as u64 - 8) != n * 4 {
        return Err(FormatError::invalid(
            path,
            format!("{w}x{h} heatmap needs {} payload bytes, found {}", n * 4, bytes.len() - 8),
        ));
    }
    let values = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Heatmap::from_grid(Grid::from_vec(w, h, values)?)?)
}

pub fn read_heatmap(path: &Path) -> Result<Heatmap, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_heatmap(&bytes, path)
}

pub fn write_heatmap(path: &Path, h: &Heatmap) -> Result<(), FormatError> {
    write_bytes(path, &encode_heatmap(h))
}
