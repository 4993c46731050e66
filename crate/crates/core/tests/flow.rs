use std::collections::BTreeMap;

use fractaug_core::dsl;
use fractaug_core::field::{
    remap_bilinear, remap_mask, transform_points, translation_field, validity_mask, Keypoint,
};
use fractaug_core::graph::{self, apply, apply_with_params, sample_params, OP_STREAM};
use fractaug_core::ops::{self, flip_h, flip_v};
use fractaug_core::{AugNode, DistSpec, ImageF, MaskF, PointSet, RandSource, SampleBundle};

/// Asymmetric card: no flip of it equals another.
fn card(w: usize, h: usize) -> ImageF {
    ImageF::from_fn(w, h, 1, |x, y, _| (x + w * y) as f64 / (w * h) as f64).unwrap()
}

fn smooth(w: usize, h: usize) -> ImageF {
    ImageF::from_fn(w, h, 3, |x, y, c| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        0.5 + 0.2 * (3.0 * u + c as f64).sin() * (2.0 * v).cos()
    })
    .unwrap()
}

const RANDOM_FLIP: &str = "vflip() ^ hflip() ^ (vflip() | hflip()) ^ identity";

#[test]
fn random_flip_yields_exactly_four_images() {
    let (w, h) = (12, 8);
    let img = card(w, h);
    let expected = [
        remap_bilinear(&img, &flip_v(w, h), 0.0),
        remap_bilinear(&img, &flip_h(w, h), 0.0),
        remap_bilinear(&remap_bilinear(&img, &flip_v(w, h), 0.0), &flip_h(w, h), 0.0),
        img.clone(),
    ];
    for i in 0..4 {
        for j in 0..i {
            assert_ne!(expected[i], expected[j]);
        }
    }
    let ast = dsl::parse(RANDOM_FLIP).unwrap();
    let mut counts = [0usize; 4];
    for seed in 0..200 {
        let g = dsl::compile(&ast, seed);
        let (out, params) = apply_with_params(&g, &SampleBundle::new(img.clone())).unwrap();
        let branch = params.branch_path()[0];
        assert_eq!(out.image, expected[branch], "seed {seed}");
        assert!(out.validity.unwrap().data().iter().all(|&v| v == 1.0));
        counts[branch] += 1;
    }
    for c in counts {
        assert!((c as f64 / 200.0 - 0.25).abs() <= 0.07, "{counts:?}");
    }
}

#[test]
fn choice_weight_law() {
    let ast = dsl::parse("hflip():3 ^ identity:1").unwrap();
    let n = 4000;
    let hits = (0..n)
        .filter(|&s| sample_params(&dsl::compile(&ast, s), 64, 64).unwrap().branch_path()[0] == 0)
        .count();
    let freq = hits as f64 / n as f64;
    // four standard errors
    assert!((freq - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / n as f64).sqrt(), "{freq}");
}

#[test]
fn paths_depend_on_size() {
    let g = dsl::build("plasma_brightness() ^ gaussian_noise()", 11).unwrap();
    let sizes = [(64, 64), (65, 64), (64, 65), (100, 30)];
    let params: Vec<_> = sizes.iter().map(|&(w, h)| sample_params(&g, w, h).unwrap()).collect();
    for i in 0..params.len() {
        for j in 0..i {
            assert_ne!(params[i], params[j]);
        }
    }
    assert_eq!(sample_params(&g, 64, 64).unwrap(), params[0]);
}

#[test]
fn validity_of_translations() {
    let (w, h) = (40, 10);
    for k in [1usize, 5, 17] {
        let v = validity_mask(&translation_field(w, h, k as f64, 0.0));
        let zero_cols = (0..w).filter(|&x| (0..h).all(|y| v.get(x, y) == 0.0)).count();
        let one_cols = (0..w).filter(|&x| (0..h).all(|y| v.get(x, y) == 1.0)).count();
        assert_eq!((zero_cols, one_cols), (k, w - k));
    }
    for f in [flip_h(w, h), flip_v(w, h)] {
        assert!(validity_mask(&f).data().iter().all(|&v| v == 1.0));
    }
}

/// Reference path: every ventral op materialized on its own.
fn sequential(g: &AugNode, b: &SampleBundle) -> SampleBundle {
    let (w, h) = (b.width(), b.height());
    let plan = sample_params(g, w, h).unwrap();
    let mut out = b.clone();
    let mut valid = MaskF::ones(w, h);
    for (op, values, key) in plan.leaves() {
        let mut rng = RandSource::new(key, OP_STREAM);
        let f = ops::run_ventral(op, values, w, h, &mut rng).unwrap();
        out.image = remap_bilinear(&out.image, &f, 0.0);
        out.points = out.points.map(|p| transform_points(&p, &f));
        valid = remap_mask(&valid, &f, 0.0);
    }
    out.validity = Some(valid);
    out
}

#[test]
fn fused_cascade_matches_sequential_remaps() {
    let (w, h) = (96, 80);
    let img = smooth(w, h);
    let pts = PointSet::from_xy(&[(30.0, 20.0), (50.5, 61.25), (70.0, 40.0)]);
    let b = SampleBundle::new(img).with_points(pts);
    for seed in 0..5 {
        let g = dsl::build(
            "perspective(corner_jitter=0.05) | hflip() | perspective(corner_jitter=0.05) | vflip()",
            seed,
        )
        .unwrap();
        let fused = apply(&g, &b).unwrap();
        let seq = sequential(&g, &b);
        let sv = seq.validity.as_ref().unwrap();
        let (mut sum, mut n) = (0.0, 0usize);
        for c in 0..3 {
            for y in 0..h {
                for x in 0..w {
                    if sv.get(x, y) >= 0.999 {
                        sum += (fused.image.get(x, y, c) - seq.image.get(x, y, c)).abs();
                        n += 1;
                    }
                }
            }
        }
        assert!(n > w * h, "validity too small");
        let mad = sum / n as f64;
        assert!(mad <= 1e-3, "seed {seed}: mean abs diff {mad}");
        let fp = fused.points.as_ref().unwrap();
        let sp = seq.points.as_ref().unwrap();
        for (a, b) in fp.points.iter().zip(&sp.points) {
            assert!((a.x - b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6, "{a:?} {b:?}");
        }
    }
}

#[test]
fn dorsal_step_splits_fusion() {
    let (w, h) = (32, 32);
    let b = SampleBundle::new(smooth(w, h));
    let g = dsl::build("hflip() | brightness_global(delta=0.1) | hflip()", 3).unwrap();
    let out = apply(&g, &b).unwrap();
    let want = b.image.map(|v| (v + 0.1).clamp(0.0, 1.0));
    assert!(out.image.max_abs_diff(&want) < 1e-12);
}

fn fifteen_node_graph() -> AugNode {
    let leaf = |op: &str, s| AugNode::leaf_default(op, s).unwrap();
    let mut warp = BTreeMap::new();
    warp.insert("strength".to_string(), DistSpec::uniform(2.0, 6.0));
    warp.insert("roughness".to_string(), DistSpec::uniform(0.3, 0.6));
    AugNode::cascade(
        vec![
            AugNode::choice(vec![leaf("hflip", 1), leaf("vflip", 2), AugNode::identity(3)], 4),
            AugNode::leaf("plasma_warp", warp, 5),
            AugNode::cascade(vec![leaf("perspective", 6), leaf("plasma_brightness", 7)], 8),
            AugNode::weighted_choice(
                vec![leaf("gaussian_noise", 9), leaf("linear_color", 10), leaf("plasma_shadow", 11)],
                vec![1.0, 2.0, 3.0],
                12,
            ),
            leaf("brightness_global", 13),
            AugNode::identity(15),
        ],
        14,
    )
}

#[test]
fn serialization_preserves_behaviour_bitwise() {
    let g = fifteen_node_graph();
    assert_eq!(g.node_count(), 15);
    let back = graph::deserialize(&graph::serialize(&g)).unwrap();
    assert_eq!(back, g);
    let (w, h) = (48, 40);
    let mask = MaskF::new(w, h, (0..w * h).map(|i| ((i / 7) % 2) as f64).collect()).unwrap();
    let b = SampleBundle::new(smooth(w, h))
        .with_mask(mask)
        .with_points(PointSet::from_xy(&[(10.0, 10.0), (47.0, 0.0)]));
    for seed in [0u64, 1, 99] {
        let (mut g1, mut g2) = (g.clone(), back.clone());
        g1.seed = seed;
        g2.seed = seed;
        let a = apply(&g1, &b).unwrap();
        let c = apply(&g2, &b).unwrap();
        assert_eq!(a.image.data(), c.image.data());
        assert_eq!(a.mask, c.mask);
        assert_eq!(a.validity, c.validity);
        assert_eq!(a.points, c.points);
    }
}

#[test]
fn repeated_apply_is_bit_identical() {
    let g = dsl::build(fractaug_core::presets::get("plasma_branching").unwrap().source, 5).unwrap();
    let b = SampleBundle::new(smooth(64, 48));
    let first = apply(&g, &b).unwrap();
    for _ in 0..3 {
        assert_eq!(apply(&g, &b).unwrap(), first);
    }
}

#[test]
fn points_leaving_the_canvas_are_flagged() {
    let f = translation_field(20, 20, 5.0, 0.0);
    let p = transform_points(&PointSet::from_xy(&[(2.0, 3.0), (17.0, 3.0)]), &f);
    assert_eq!(p.points[0], Keypoint { x: 7.0, y: 3.0, in_frame: true });
    assert!(!p.points[1].in_frame);
}
