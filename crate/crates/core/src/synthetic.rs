//! Procedural scenes of flat-coloured rectangles and ellipses with exact
//! modal and amodal masks, for demos and end-to-end tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bbox::BBox;
use crate::datagen::{dataset_mean_pixel, DatasetEntry, DatasetManifest, InstanceRecord};
use crate::raster::{bbox_of, BinaryMask, Image, Rgb};

pub const CATEGORIES: [&str; 2] = ["ellipse", "rectangle"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Rect(BBox),
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

impl Shape {
    /// Membership of the pixel whose centre is `(x + 0.5, y + 0.5)`.
    pub fn contains(&self, x: i32, y: i32) -> bool {
        match *self {
            Shape::Rect(b) => b.contains_point(x, y),
            Shape::Ellipse { cx, cy, rx, ry } => {
                let dx = (x as f64 + 0.5 - cx) / rx;
                let dy = (y as f64 + 0.5 - cy) / ry;
                dx * dx + dy * dy <= 1.0
            }
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Shape::Ellipse { .. } => CATEGORIES[0],
            Shape::Rect(_) => CATEGORIES[1],
        }
    }

    pub fn mask(&self, w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| self.contains(x as i32, y as i32)).expect("scene dimensions are non-zero")
    }

    /// A rectangle or ellipse of side lengths in `[lo, hi]`, centred somewhere
    /// inside `area`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, area: BBox, lo: u32, hi: u32) -> Shape {
        let w = rng.random_range(lo..=hi) as i32;
        let h = rng.random_range(lo..=hi) as i32;
        let cx = rng.random_range(area.x0()..area.x1());
        let cy = rng.random_range(area.y0()..area.y1());
        if rng.random_bool(0.5) {
            Shape::Rect(BBox::new(cx - w / 2, cy - h / 2, cx - w / 2 + w, cy - h / 2 + h).unwrap())
        } else {
            Shape::Ellipse {
                cx: cx as f64,
                cy: cy as f64,
                rx: w as f64 / 2.0,
                ry: h as f64 / 2.0,
            }
        }
    }
}

fn random_colour<R: Rng + ?Sized>(rng: &mut R) -> Rgb {
    [rng.random_range(30..=230), rng.random_range(30..=230), rng.random_range(30..=230)]
}

/// Smooth two-colour gradient with mild per-pixel noise.
pub fn background<R: Rng + ?Sized>(rng: &mut R, w: u32, h: u32) -> Image {
    let a = random_colour(rng);
    let b = random_colour(rng);
    let horizontal = rng.random_bool(0.5);
    Image::from_fn(w, h, |x, y| {
        let t = if horizontal { x as f64 / w as f64 } else { y as f64 / h as f64 };
        let noise: i32 = rng.random_range(-6..=6);
        let mut px = [0u8; 3];
        for c in 0..3 {
            let v = a[c] as f64 * (1.0 - t) + b[c] as f64 * t + noise as f64;
            px[c] = v.round().clamp(0.0, 255.0) as u8;
        }
        px
    })
    .expect("scene dimensions are non-zero")
}

/// A rendered scene. Objects are painted in order, so later ones occlude
/// earlier ones; `modal[k]` is what remains visible of `amodal[k]`.
#[derive(Clone, Debug)]
pub struct Scene {
    pub image: Image,
    pub shapes: Vec<Shape>,
    pub amodal: Vec<BinaryMask>,
    pub modal: Vec<BinaryMask>,
}

pub fn render<R: Rng + ?Sized>(rng: &mut R, w: u32, h: u32, shapes: Vec<Shape>) -> Scene {
    let mut image = background(rng, w, h);
    let amodal: Vec<BinaryMask> = shapes.iter().map(|s| s.mask(w, h)).collect();
    let mut modal = amodal.clone();
    for (k, m) in amodal.iter().enumerate() {
        let colour = random_colour(rng);
        for (x, y) in m.coords() {
            if m.get(x, y) {
                image.set(x, y, colour);
                for earlier in modal.iter_mut().take(k) {
                    earlier.set(x, y, false);
                }
            }
        }
    }
    Scene {
        image,
        shapes,
        amodal,
        modal,
    }
}

/// Small annotated dataset of `n_images` random scenes. Instances whose
/// visible region is smaller than 40 pixels are left unannotated.
pub fn demo_manifest(seed: u64, n_images: usize) -> DatasetManifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_images);
    while entries.len() < n_images {
        let w = rng.random_range(96..=160);
        let h = rng.random_range(96..=160);
        let area = BBox::new(16, 16, w as i32 - 16, h as i32 - 16).unwrap();
        let n = rng.random_range(1..=3);
        let shapes = (0..n).map(|_| Shape::random(&mut rng, area, 18, 56)).collect();
        let scene = render(&mut rng, w, h, shapes);
        let image_id = format!("img{:03}", entries.len());
        let instances: Vec<InstanceRecord> = scene
            .modal
            .iter()
            .zip(&scene.amodal)
            .zip(&scene.shapes)
            .filter(|((m, _), _)| m.count() >= 40)
            .map(|((m, a), s)| {
                let occluded = m.count() < a.count();
                InstanceRecord::new(image_id.clone(), s.category(), m.clone(), Some(occluded)).unwrap()
            })
            .collect();
        if instances.is_empty() {
            continue;
        }
        entries.push(DatasetEntry {
            path: format!("images/{image_id}.png").into(),
            image_id,
            image: scene.image,
            instances,
        });
    }
    let images: Vec<&Image> = entries.iter().map(|e| &e.image).collect();
    let mean = dataset_mean_pixel(&images);
    DatasetManifest::new(mean, CATEGORIES.iter().map(|s| s.to_string()).collect(), entries)
        .expect("demo scenes are well-formed")
}

/// One main object, possibly behind occluders, in a `size × size` scene.
#[derive(Clone, Debug)]
pub struct OcclusionScene {
    pub image: Image,
    pub shape: Shape,
    /// Full extent of the main object.
    pub truth: BinaryMask,
    /// What the occluders leave visible.
    pub visible: BinaryMask,
    pub modal_box: BBox,
    pub occluded: bool,
}

/// Builds a scene with a main object of side 24–56 pixels. When `occluded`,
/// one or two occluders hide between 15% and 60% of it; otherwise the
/// occluders (if any) keep clear of it.
pub fn occlusion_scene<R: Rng + ?Sized>(rng: &mut R, size: u32, occluded: bool) -> OcclusionScene {
    let frame = BBox::frame(size, size).unwrap();
    let inner = BBox::new(36, 36, size as i32 - 36, size as i32 - 36).unwrap_or(frame);
    loop {
        let main = Shape::random(rng, inner, 24, 56);
        let truth = main.mask(size, size);
        let total = truth.count();
        if total == 0 {
            continue;
        }
        let n_occ = if occluded { rng.random_range(1..=2) } else { rng.random_range(0..=2) };
        let occluders: Vec<Shape> = (0..n_occ).map(|_| Shape::random(rng, frame, 14, 48)).collect();
        let mut covered = BinaryMask::new(size, size, false).unwrap();
        for o in &occluders {
            covered = covered.or(&o.mask(size, size)).unwrap();
        }
        let hidden = truth.and(&covered).unwrap().count() as f64 / total as f64;
        let acceptable = if occluded { (0.15..=0.60).contains(&hidden) } else { hidden == 0.0 };
        if !acceptable {
            continue;
        }
        let mut shapes = vec![main];
        shapes.extend(occluders);
        let scene = render(rng, size, size, shapes);
        let visible = scene.modal[0].clone();
        let Ok(modal_box) = bbox_of(&visible) else {
            continue;
        };
        return OcclusionScene {
            image: scene.image,
            shape: main,
            truth,
            visible,
            modal_box,
            occluded,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_manifest_is_deterministic_and_valid() {
        let a = demo_manifest(7, 4);
        let b = demo_manifest(7, 4);
        assert_eq!(a, b);
        assert_eq!(a.entries.len(), 4);
        for e in &a.entries {
            for inst in &e.instances {
                assert!(inst.modal_mask.count() >= 40);
            }
        }
    }

    #[test]
    fn later_shapes_occlude_earlier_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Shape::Rect(BBox::new(0, 0, 10, 10).unwrap());
        let b = Shape::Rect(BBox::new(5, 0, 15, 10).unwrap());
        let s = render(&mut rng, 20, 20, vec![a, b]);
        assert_eq!(s.modal[0].count(), 50);
        assert_eq!(s.modal[1].count(), 100);
        assert_eq!(s.amodal[0].count(), 100);
    }

    #[test]
    fn occlusion_scene_respects_requested_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for occluded in [true, false] {
            for _ in 0..20 {
                let s = occlusion_scene(&mut rng, 128, occluded);
                let hidden = 1.0 - s.visible.count() as f64 / s.truth.count() as f64;
                if occluded {
                    assert!((0.15 - 1e-9..=0.60 + 1e-9).contains(&hidden));
                } else {
                    assert_eq!(s.visible, s.truth);
                }
            }
        }
    }
}
