use fractaug_core::field::{
    compose_fields, identity_field, remap_bilinear, transform_points, translation_field,
    validity_mask, Homography,
};
use fractaug_core::ops::{flip_h, flip_v};
use fractaug_core::{ImageF, PointSet, SamplingField};
use proptest::prelude::*;

fn image(w: usize, h: usize, salt: u64) -> ImageF {
    ImageF::from_fn(w, h, 1, |x, y, _| ((x as u64 * 31 + y as u64 * 17 + salt) % 97) as f64 / 96.0)
        .unwrap()
}

fn affine() -> impl Strategy<Value = Homography> {
    (0.8f64..1.2, -0.2f64..0.2, -0.2f64..0.2, 0.8f64..1.2, -5.0f64..5.0, -5.0f64..5.0)
        .prop_map(|(a, b, c, d, tx, ty)| Homography([a, b, tx, c, d, ty, 0.0, 0.0, 1.0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identity_is_neutral(w in 2usize..40, h in 2usize..40, hm in affine()) {
        let id = identity_field(w, h);
        let img = image(w, h, 3);
        prop_assert!(remap_bilinear(&img, &id, 0.0).max_abs_diff(&img) < 1e-6);
        let f = SamplingField::from_homography(w, h, hm).unwrap();
        prop_assert!(compose_fields(&id, &f).unwrap().max_abs_diff(&f) < 1e-6);
        prop_assert!(compose_fields(&f, &id).unwrap().max_abs_diff(&f) < 1e-6);
    }

    #[test]
    fn flips_are_involutions(w in 1usize..30, h in 1usize..30) {
        let img = image(w, h, 5);
        for f in [flip_h(w, h), flip_v(w, h)] {
            let twice = remap_bilinear(&remap_bilinear(&img, &f, 0.0), &f, 0.0);
            prop_assert_eq!(&twice, &img);
            prop_assert!(validity_mask(&f).data().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn translation_validity_counts(w in 4usize..60, k in 0usize..4) {
        let k = k.min(w - 1);
        let v = validity_mask(&translation_field(w, 3, k as f64, 0.0));
        let zeros = v.data().iter().filter(|&&x| x == 0.0).count();
        prop_assert_eq!(zeros, 3 * k);
    }

    /// A transformed point lands where the field reads the original from.
    #[test]
    fn points_follow_the_warp(hm in affine(), px in 10.0f64..50.0, py in 10.0f64..40.0) {
        let (w, h) = (64, 52);
        let f = SamplingField::from_homography(w, h, hm).unwrap();
        // the same field without the registered forward map goes through the
        // numerical inversion path
        let g = SamplingField::new(w, h, f.sx().to_vec(), f.sy().to_vec()).unwrap();
        for field in [&f, &g] {
            let q = transform_points(&PointSet::from_xy(&[(px, py)]), field).points[0];
            let (sx, sy) = hm.apply(q.x, q.y);
            if q.in_frame {
                prop_assert!((sx - px).abs() < 1e-3 && (sy - py).abs() < 1e-3,
                    "({px},{py}) -> ({},{}) reads ({sx},{sy})", q.x, q.y);
            }
        }
    }

    #[test]
    fn composition_matches_double_remap_on_affine_maps(a in affine(), b in affine()) {
        let (w, h) = (40, 30);
        // smooth ramp: bilinear reproduces it exactly where defined
        let img = ImageF::from_fn(w, h, 1, |x, y, _| 0.01 * x as f64 + 0.02 * y as f64).unwrap();
        let fa = SamplingField::from_homography(w, h, a).unwrap();
        let fb = SamplingField::from_homography(w, h, b).unwrap();
        let composed = compose_fields(&fb, &fa).unwrap();
        let once = remap_bilinear(&img, &composed, 0.0);
        let twice = remap_bilinear(&remap_bilinear(&img, &fa, 0.0), &fb, 0.0);
        let inside = |(x, y): (f64, f64)| {
            x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64
        };
        for y in 0..h {
            for x in 0..w {
                let (bx, by) = fb.source_px(x, y);
                // every tap of the second remap must read a fully defined pixel
                let taps_ok = inside((bx, by))
                    && [(bx.floor(), by.floor()), (bx.ceil(), by.floor()), (bx.floor(), by.ceil()), (bx.ceil(), by.ceil())]
                        .iter()
                        .all(|&(tx, ty)| inside(fa.source_px(tx as usize, ty as usize)));
                if taps_ok && inside(composed.source_px(x, y)) {
                    prop_assert!((once.get(x, y, 0) - twice.get(x, y, 0)).abs() < 1e-9);
                }
            }
        }
    }
}
