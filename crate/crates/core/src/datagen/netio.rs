//! Fixed-size network inputs and targets derived from a [`GenSample`].

use super::{DatagenError, GenSample};
use crate::bbox::{BBox, Rect};
use crate::raster::{Grid, Heatmap, Image, Rgb, TriLabelMask};
use crate::resample::{crop_resize, regrid, resize_nearest, Interpolation};

pub const NET_INPUT_SIZE: u32 = 224;

/// Share of the patch removed from each side before it is shown to the net.
const TRIM_FRAC: f64 = 0.10;
/// Minimum share of the trimmed view that must be visible object.
const MIN_TRIMMED_VISIBLE: f64 = 0.10;

#[derive(Clone, Debug, PartialEq)]
pub struct NetExample {
    /// Trimmed patch view, resized; not yet mean-centred.
    pub input_patch: Image,
    /// Modal heatmap over the same trimmed view.
    pub input_heatmap: Heatmap,
    /// `round(255 h) - 127` per element of `input_heatmap`.
    pub centered_heatmap_channel: Grid<i16>,
    /// Target over the full, untrimmed patch.
    pub target: TriLabelMask,
    pub loss_weight: f64,
    pub category: String,
    pub mean_pixel: Rgb,
    /// Trimmed view in patch coordinates.
    pub trimmed_box: BBox,
}

impl NetExample {
    /// Patch pixels with the mean pixel subtracted, row-major RGB.
    pub fn centered_patch(&self) -> Vec<f32> {
        self.input_patch
            .data()
            .iter()
            .flat_map(|px| (0..3).map(move |c| px[c] as f32 - self.mean_pixel[c] as f32))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetIoOutcome {
    Accepted(Box<NetExample>),
    /// Too little of the object is visible in the trimmed view; draw a new sample.
    Reject { visible_share: f64 },
}

/// What a modal predictor sees: the patch inside the jittered modal box,
/// resized anisotropically. Overhang beyond the patch takes `mean_pixel`.
pub fn modal_predictor_input(sample: &GenSample, mean_pixel: Rgb) -> Result<Image, DatagenError> {
    Ok(crop_resize(
        &sample.patch,
        &sample.jittered_modal_box,
        NET_INPUT_SIZE,
        NET_INPUT_SIZE,
        Interpolation::Bilinear,
        mean_pixel,
    )?)
}

fn trimmed_view(w: u32, h: u32) -> BBox {
    let tx = (w as f64 * TRIM_FRAC).round() as i32;
    let ty = (h as f64 * TRIM_FRAC).round() as i32;
    BBox::new(tx, ty, w as i32 - tx, h as i32 - ty).unwrap_or_else(|_| BBox::frame(w, h).unwrap())
}

/// Rounds half away from zero.
fn centre_heat(v: f32) -> i16 {
    (255.0 * v as f64).round() as i16 - 127
}

/// Builds the net's input and target from `sample`.
///
/// `modal_heat`, when given, covers the sample's jittered modal box. Without
/// it the heatmap channel is a constant 0.5.
pub fn prepare_net_io(sample: &GenSample, modal_heat: Option<&Heatmap>, mean_pixel: Rgb) -> Result<NetIoOutcome, DatagenError> {
    let (pw, ph) = (sample.patch.width(), sample.patch.height());
    let trimmed = trimmed_view(pw, ph);
    let visible_share = sample.visible_mask.count_in(&trimmed) as f64 / trimmed.area() as f64;
    if visible_share < MIN_TRIMMED_VISIBLE {
        return Ok(NetIoOutcome::Reject { visible_share });
    }

    let n = NET_INPUT_SIZE;
    let input_patch = crop_resize(&sample.patch, &trimmed, n, n, Interpolation::Bilinear, mean_pixel)?;

    let patch_rect = Rect::from(sample.patch.frame());
    let input_heatmap = match modal_heat {
        Some(h) => {
            let aligned = regrid(
                h.grid(),
                Rect::from(sample.jittered_modal_box),
                patch_rect,
                n,
                n,
                Interpolation::Bilinear,
                0.0,
            )?;
            let trimmed_heat = regrid(&aligned, patch_rect, Rect::from(trimmed), n, n, Interpolation::Bilinear, 0.0)?;
            Heatmap::from_grid_clamped(trimmed_heat)
        }
        None => Heatmap::constant(n, n, 0.5)?,
    };
    let centered_heatmap_channel = input_heatmap.map(centre_heat);

    let target = resize_nearest(&sample.target, n, n)?;
    let factor = (n as f64 / (trimmed.width() as f64 * trimmed.height() as f64).sqrt()).max(1.0);

    Ok(NetIoOutcome::Accepted(Box::new(NetExample {
        input_patch,
        input_heatmap,
        centered_heatmap_channel,
        target,
        loss_weight: 1.0 / factor,
        category: sample.main_category.clone(),
        mean_pixel,
        trimmed_box: trimmed,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{BinaryMask, TriLabel};

    fn sample_with_visible(w: u32, h: u32, visible: BinaryMask) -> GenSample {
        let frame = BBox::frame(w, h).unwrap();
        GenSample {
            patch: Image::new(w, h, [50, 60, 70]).unwrap(),
            patch_box: frame,
            visible_box: frame,
            jittered_modal_box: frame,
            target: visible.map(|b| if b { TriLabel::Positive } else { TriLabel::Negative }),
            true_full_mask: visible.clone(),
            visible_mask: visible,
            visible_fraction: 1.0,
            seed: 0,
            main_category: "cat".into(),
            main_image_id: "i".into(),
            main_instance: 0,
            overlays: vec![],
        }
    }

    #[test]
    fn heat_centering_rounds_half_up() {
        assert_eq!(centre_heat(0.5), 1);
        assert_eq!(centre_heat(0.0), -127);
        assert_eq!(centre_heat(1.0), 128);
    }

    #[test]
    fn constant_heat_and_saturated_visibility() {
        let s = sample_with_visible(50, 40, BinaryMask::new(50, 40, true).unwrap());
        let NetIoOutcome::Accepted(ex) = prepare_net_io(&s, None, [0; 3]).unwrap() else {
            panic!("saturated sample rejected");
        };
        assert!(ex.centered_heatmap_channel.data().iter().all(|&v| v == 1));
        assert_eq!(ex.trimmed_box, BBox::new(5, 4, 45, 36).unwrap());
        let expect = 1.0 / (224.0 / (40.0f64 * 32.0).sqrt());
        assert!((ex.loss_weight - expect).abs() < 1e-12);
        assert_eq!(ex.target.width(), 224);
        assert!(ex.target.data().iter().all(|&l| l == TriLabel::Positive));
        assert!(ex.input_patch.data().iter().all(|&p| p == [50, 60, 70]));
    }

    #[test]
    fn just_below_tenth_visible_is_rejected() {
        // 50x31 patch trims to 40x25 = 1000 pixels
        let mk = |k: usize| {
            let mut m = BinaryMask::new(50, 31, false).unwrap();
            let trimmed = trimmed_view(50, 31);
            assert_eq!(trimmed.area(), 1000);
            let cells: Vec<(u32, u32)> = (trimmed.y0()..trimmed.y1())
                .flat_map(|y| (trimmed.x0()..trimmed.x1()).map(move |x| (x as u32, y as u32)))
                .take(k)
                .collect();
            for (x, y) in cells {
                m.set(x, y, true);
            }
            sample_with_visible(50, 31, m)
        };
        assert!(matches!(
            prepare_net_io(&mk(99), None, [0; 3]).unwrap(),
            NetIoOutcome::Reject { visible_share } if (visible_share - 0.099).abs() < 1e-12
        ));
        assert!(matches!(prepare_net_io(&mk(100), None, [0; 3]).unwrap(), NetIoOutcome::Accepted(_)));
    }

    #[test]
    fn large_crops_are_not_upweighted() {
        let s = sample_with_visible(400, 400, BinaryMask::new(400, 400, true).unwrap());
        let NetIoOutcome::Accepted(ex) = prepare_net_io(&s, None, [0; 3]).unwrap() else {
            panic!()
        };
        assert_eq!(ex.loss_weight, 1.0);
    }

    #[test]
    fn modal_heat_is_aligned_into_patch() {
        let mut s = sample_with_visible(100, 100, BinaryMask::new(100, 100, true).unwrap());
        s.jittered_modal_box = BBox::new(50, 0, 100, 100).unwrap();
        let h = Heatmap::constant(8, 8, 1.0).unwrap();
        let NetIoOutcome::Accepted(ex) = prepare_net_io(&s, Some(&h), [0; 3]).unwrap() else {
            panic!()
        };
        // trimmed view spans x in [10, 90); the jittered box starts at x = 50
        let row: Vec<f32> = (0..224).map(|u| ex.input_heatmap.get(u, 112)).collect();
        assert_eq!(row[0], 0.0);
        assert_eq!(row[223], 1.0);
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(ex.centered_heatmap_channel.get(0, 0), -127);
    }
}
