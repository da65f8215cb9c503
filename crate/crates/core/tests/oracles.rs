//! Library functions against independent brute-force references.

mod common;

use amodalforge_core::datagen::{
    generate_example, jitter_box, place_overlay, sample_main_object, sample_patch_box, Composite, DatasetEntry,
    DatasetManifest, GenConfig, InstanceRecord,
};
use amodalforge_core::metrics::{accuracy_curve, area_ratio, map_r, occlusion_pr, ratio_histogram, AreaRatioSample};
use amodalforge_core::resample::{crop_resize, resample_heatmap, Interpolation};
use amodalforge_core::{bbox_of, box_iou, per_dim_overlap, BBox, Heatmap, Image};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn bbox_of_matches_pixel_scan() {
    let mut r = rng(1);
    for _ in 0..500 {
        let p = r.random_range(0.01..0.3);
        let m = random_mask(&mut r, 16, 16, p);
        match scan_bbox(&m) {
            None => assert!(bbox_of(&m).is_err()),
            Some(b) => assert_eq!(bbox_of(&m).unwrap().to_array(), [b.0, b.1, b.2, b.3]),
        }
    }
}

#[test]
fn box_iou_matches_cell_count() {
    let a = BBox::new(0, 0, 2, 2).unwrap();
    let b = BBox::new(1, 0, 3, 2).unwrap();
    assert!((box_iou(&a, &b) - 2.0 / 6.0).abs() < 1e-12);
    let mut r = rng(2);
    for _ in 0..1000 {
        let a = random_box(&mut r, 12, 12);
        let b = random_box(&mut r, 12, 12);
        assert!((box_iou(&a, &b) - cell_iou(&a, &b)).abs() <= 1e-12);
    }
}

#[test]
fn per_dim_overlap_by_hand() {
    let b = BBox::new(5, 0, 15, 10).unwrap();
    let reference = BBox::new(0, 0, 10, 10).unwrap();
    assert_eq!(per_dim_overlap(&b, &reference), (0.5, 1.0));
}

#[test]
fn area_ratio_matches_pixel_count() {
    let mut r = rng(3);
    for _ in 0..1000 {
        let modal = random_mask(&mut r, 8, 8, 0.5);
        let amodal = random_mask(&mut r, 8, 8, 0.5);
        match area_ratio_oracle(&modal, &amodal) {
            None => assert!(area_ratio(&modal, &amodal).is_err()),
            Some(want) => assert!((area_ratio(&modal, &amodal).unwrap() - want).abs() <= 1e-12),
        }
    }
}

/// Tent weights of source cells for an output cell centre, with the sample
/// position clamped to the outermost source centres.
fn tent_weights(u: u32, n_in: u32, n_out: u32) -> Vec<f64> {
    let pos = ((u as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
    (0..n_in).map(|i| (1.0 - (pos - i as f64).abs()).max(0.0)).collect()
}

#[test]
fn checkerboard_downsample_matches_separable_reference() {
    let img = Image::from_fn(8, 6, |x, y| if (x + y) % 2 == 0 { [255, 0, 40] } else { [0, 255, 200] }).unwrap();
    let (ow, oh) = (3, 4);
    let got = crop_resize(&img, &img.frame(), ow, oh, Interpolation::Bilinear, [0; 3]).unwrap();
    for v in 0..oh {
        let wy = tent_weights(v, 6, oh);
        for u in 0..ow {
            let wx = tent_weights(u, 8, ow);
            for c in 0..3 {
                // x pass then y pass
                let rows: Vec<f64> = (0..6)
                    .map(|y| (0..8).map(|x| wx[x as usize] * img.get(x, y)[c] as f64).sum())
                    .collect();
                let val: f64 = (0..6).map(|y| wy[y] * rows[y]).sum();
                assert_eq!(got.get(u, v)[c], val.round() as u8, "({u},{v}) channel {c}");
            }
        }
    }
    let near = crop_resize(&img, &img.frame(), 4, 3, Interpolation::Nearest, [0; 3]).unwrap();
    for v in 0..3 {
        for u in 0..4 {
            // the source cell containing the output centre
            let sx = ((u as f64 + 0.5) * 2.0) as u32;
            let sy = ((v as f64 + 0.5) * 2.0) as u32;
            assert_eq!(near.get(u, v), img.get(sx, sy));
        }
    }
}

#[test]
fn bilinear_heatmap_matches_closed_form() {
    let mut r = rng(4);
    for _ in 0..50 {
        let vals: Vec<f32> = (0..16).map(|_| r.random_range(0.0f32..=1.0)).collect();
        let h = Heatmap::new(4, 4, vals).unwrap();
        let (ow, oh) = (r.random_range(1..10), r.random_range(1..10));
        let out = resample_heatmap(&h, ow, oh).unwrap();
        for v in 0..oh {
            for u in 0..ow {
                let wx = tent_weights(u, 4, ow);
                let wy = tent_weights(v, 4, oh);
                let mut want = 0.0;
                for y in 0..4 {
                    for x in 0..4 {
                        want += wx[x as usize] * wy[y as usize] * h.grid().get(x, y) as f64;
                    }
                }
                assert!((out.grid().get(u, v) as f64 - want).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn occlusion_ap_matches_threshold_sweep() {
    let mut r = rng(5);
    for trial in 0..1000 {
        let n = if trial < 20 { 20 } else { r.random_range(1..=10) };
        let samples: Vec<AreaRatioSample> = (0..n)
            .map(|_| AreaRatioSample {
                ratio: r.random_range(0..=12) as f64 / 12.0,
                occluded: r.random_bool(0.5),
            })
            .collect();
        match occlusion_pr_oracle(&samples) {
            None => assert!(occlusion_pr(&samples).is_err()),
            Some((points, ap)) => {
                let got = occlusion_pr(&samples).unwrap();
                assert!((got.average_precision - ap).abs() <= 1e-12, "{samples:?}");
                assert_eq!(got.points.len(), points.len());
                for (p, q) in got.points.iter().zip(&points) {
                    assert_eq!(p.threshold, q.0);
                    assert!((p.precision - q.1).abs() <= 1e-12 && (p.recall - q.2).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn histogram_matches_edge_comparison() {
    let grid: Vec<f64> = (0..1000).map(|k| k as f64 / 999.0).collect();
    assert_eq!(ratio_histogram(&grid, 100).unwrap(), histogram_oracle(&grid, 100));
    let hundredths: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    assert_eq!(ratio_histogram(&hundredths, 100).unwrap(), histogram_oracle(&hundredths, 100));
    let mut r = rng(6);
    for bins in [1, 3, 7, 10, 100] {
        let v: Vec<f64> = (0..500).map(|_| r.random_range(0.0..=1.0)).collect();
        assert_eq!(ratio_histogram(&v, bins).unwrap(), histogram_oracle(&v, bins));
    }
}

#[test]
fn accuracy_matches_counting() {
    let mut r = rng(7);
    for trial in 0..1000 {
        let n = if trial < 1 { 50 } else { r.random_range(1..=10) };
        let ious: Vec<f64> = (0..n)
            .map(|_| if r.random_bool(0.3) { r.random_range(0..=20) as f64 / 20.0 } else { r.random_range(0.0..=1.0) })
            .collect();
        let (counts, auc) = accuracy_oracle(&ious);
        let c = accuracy_curve(&ious).unwrap();
        for (k, &cnt) in counts.iter().enumerate() {
            assert_eq!((c.accuracy[k] * n as f64).round() as usize, cnt);
            assert!((c.accuracy[k] - cnt as f64 / n as f64).abs() <= 1e-12);
        }
        assert!((c.auc - auc).abs() <= 1e-12);
    }
}

#[test]
fn map_r_matches_greedy_simulation() {
    let mut r = rng(8);
    for _ in 0..1000 {
        let (preds, gts) = random_detseg(&mut r);
        let cutoff = [0.3, 0.5, 0.7][r.random_range(0..3)];
        let want = map_r_oracle(&preds, &gts, cutoff);
        let got = map_r(&preds, &gts, cutoff).unwrap();
        assert_eq!(got.per_category.len(), want.per_category.len());
        for (cat, ap) in &want.per_category {
            let g = &got.per_category[cat];
            assert_eq!(g.true_positives, want.tp[cat]);
            match (g.ap, ap) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12, "{cat}: {a} vs {b}"),
                (None, None) => {}
                other => panic!("{cat}: {other:?}"),
            }
        }
        match (got.mean, want.mean) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12),
            (None, None) => {}
            other => panic!("{other:?}"),
        }
    }
}

fn rect_instance(id: &str, w: u32, h: u32, b: BBox) -> InstanceRecord {
    InstanceRecord::new(id, "thing", box_mask(&b, w, h), None).unwrap()
}

#[test]
fn images_are_sampled_uniformly() {
    let img = Image::new(10, 10, [0; 3]).unwrap();
    let entry = |id: &str, n: usize| DatasetEntry {
        image_id: id.into(),
        path: format!("{id}.png").into(),
        image: img.clone(),
        instances: (0..n).map(|k| rect_instance(id, 10, 10, BBox::new(k as i32, 0, k as i32 + 2, 2).unwrap())).collect(),
    };
    let m = DatasetManifest::new([0.0; 3], vec!["thing".into()], vec![entry("a", 1), entry("b", 3)]).unwrap();
    let mut r = rng(9);
    let n = 100_000;
    let first = (0..n).filter(|_| sample_main_object(&m, &mut r).unwrap().image == 0).count() as f64;
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((first - n as f64 / 2.0).abs() <= 3.0 * sigma, "{first}");
}

#[test]
fn patch_boxes_satisfy_constraints() {
    let cfg = GenConfig::default();
    let mut r = rng(10);
    let full = BBox::frame(50, 40).unwrap();
    for i in 0..10_000 {
        let obj = if i % 2 == 0 { full } else { random_box(&mut r, 50, 40) };
        let Ok(b) = sample_patch_box(&obj, 50, 40, &cfg, &mut r) else {
            continue;
        };
        let (fx, fy) = (
            (b.x0().max(obj.x0())..b.x1().min(obj.x1())).count() as f64 / obj.width() as f64,
            (b.y0().max(obj.y0())..b.y1().min(obj.y1())).count() as f64 / obj.height() as f64,
        );
        assert!(fx >= 0.7 && fy >= 0.7);
        let (rw, rh) = (b.width() as f64 / obj.width() as f64, b.height() as f64 / obj.height() as f64);
        assert!((0.7..=2.0).contains(&rw) && (0.7..=2.0).contains(&rh));
        assert!(b.x0() >= 0 && b.y0() >= 0 && b.x1() <= 50 && b.y1() <= 40);
    }
}

#[test]
fn jitter_satisfies_constraints() {
    let cfg = GenConfig::default();
    let vis = BBox::new(10, 10, 60, 40).unwrap();
    let mut r = rng(11);
    for _ in 0..10_000 {
        let j = jitter_box(&vis, &cfg, &mut r);
        let fx = (j.x0().max(10)..j.x1().min(60)).count() as f64 / 50.0;
        let fy = (j.y0().max(10)..j.y1().min(40)).count() as f64 / 30.0;
        assert!(fx >= 0.75 && fy >= 0.75, "{j}");
        assert!((j.width() as i32 - 50).abs() <= 5 && (j.height() as i32 - 30).abs() <= 3, "{j}");
    }
}

#[test]
fn overlay_placements_hit_the_object_at_the_drawn_scale() {
    let cfg = GenConfig::default();
    let m = demo12();
    let mut r = rng(12);
    let mut scales = Vec::new();
    for _ in 0..1000 {
        let main_ref = sample_main_object(&m, &mut r).unwrap();
        let main = m.instance(main_ref);
        let state = Composite::cut(m.image(main_ref), main, &main.bbox());
        let vis = bbox_of(&state.visible).unwrap();
        let donor_ref = sample_main_object(&m, &mut r).unwrap();
        let donor = m.instance(donor_ref);
        let (_, p) = place_overlay(&state, m.image(donor_ref), donor, donor_ref.instance, &cfg, &mut r).unwrap();
        assert!(p.bbox.intersect(&vis).is_some_and(|i| i.area() > 0));
        let (ps, os) = match p.shortest_axis {
            amodalforge_core::datagen::Axis::X => (state.patch.width(), p.bbox.width()),
            amodalforge_core::datagen::Axis::Y => (state.patch.height(), p.bbox.height()),
        };
        // the pasted side is the drawn scale times the patch side, up to rounding
        let ratio = os as f64 / ps as f64;
        assert!((ratio - p.scale).abs() <= 0.5 / ps as f64 + 1e-9, "{ratio} vs {}", p.scale);
        assert!((0.5..=1.0).contains(&p.scale));
        scales.push(p.scale);
    }
    let mean = scales.iter().sum::<f64>() / scales.len() as f64;
    assert!((mean - 0.75).abs() <= 0.01, "{mean}");
}

#[test]
fn generated_samples_satisfy_every_constraint() {
    let m = demo12();
    let cfg = GenConfig::default();
    for seed in 0..10_000u64 {
        let s = generate_example(&m, &cfg, seed).unwrap();
        let bad = generator_violations(&m, &cfg, &s);
        assert!(bad.is_empty(), "seed {seed}: {bad:?}");
    }
}

#[test]
fn trilabel_precedence_on_overlap() {
    // main drawn on top of another instance: the shared pixels stay positive
    let main = rect_instance("i", 8, 8, BBox::new(1, 1, 5, 5).unwrap());
    let other = rect_instance("i", 8, 8, BBox::new(3, 3, 7, 7).unwrap());
    let t = amodalforge_core::datagen::assign_target_labels(&BBox::frame(8, 8).unwrap(), &main, &[&other]);
    for y in 0..8 {
        for x in 0..8 {
            let want = if (1..5).contains(&x) && (1..5).contains(&y) {
                amodalforge_core::TriLabel::Positive
            } else if (3..7).contains(&x) && (3..7).contains(&y) {
                amodalforge_core::TriLabel::Unknown
            } else {
                amodalforge_core::TriLabel::Negative
            };
            assert_eq!(t.get(x, y), want);
        }
    }
}
