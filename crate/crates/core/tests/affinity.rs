//! one_ds is affine in the seed grid for fixed noise. Finite differences
//! must reproduce the linear weights derived cell by cell below.

use fractaug_core::plasma::one_ds;
use fractaug_core::rng::{InjectedNoise, NoiseSource};
use fractaug_core::{Grid2D, RandSource};

/// d out(x, y) / d seed(kx, ky), written out from the update rules:
/// carried cells copy their seed, diamond cells take (1-e)/4 of each
/// corner, square cells take (1-e)/count of each in-bounds neighbour.
fn analytic(w: usize, h: usize, e: f64, kx: usize, ky: usize, x: usize, y: usize) -> f64 {
    let (ow, oh) = (2 * w - 1, 2 * h - 1);
    let carried = |x: usize, y: usize| if (x / 2, y / 2) == (kx, ky) { 1.0 } else { 0.0 };
    let diamond = |x: usize, y: usize| {
        let mut s = 0.0;
        for (dx, dy) in [(-1i64, -1i64), (1, -1), (-1, 1), (1, 1)] {
            s += carried((x as i64 + dx) as usize, (y as i64 + dy) as usize);
        }
        (1.0 - e) * s / 4.0
    };
    match (x % 2, y % 2) {
        (0, 0) => carried(x, y),
        (1, 1) => diamond(x, y),
        _ => {
            let mut s = 0.0;
            let mut count = 0.0;
            for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= ow as i64 || ny >= oh as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                count += 1.0;
                s += if nx % 2 == 0 { carried(nx, ny) } else { diamond(nx, ny) };
            }
            (1.0 - e) * s / count
        }
    }
}

#[test]
fn finite_differences_match_linear_weights() {
    let (w, h) = (9, 7);
    let mut rng = RandSource::new(5, 0);
    let seed = Grid2D::from_fn(w, h, |_, _| rng.next_unit());
    let e = 0.37;
    let need = (2 * w - 1) * (2 * h - 1);
    let mut noise = vec![0.0; need];
    RandSource::new(6, 0).fill_unit(&mut noise).unwrap();
    let run = |g: &Grid2D| one_ds(g, e, &mut InjectedNoise::new(&noise)).unwrap();

    let step = 1e-3;
    let mut picker = RandSource::new(7, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let kx = (picker.next_unit() * w as f64) as usize;
        let ky = (picker.next_unit() * h as f64) as usize;
        let mut plus = seed.clone();
        let mut minus = seed.clone();
        plus.set(kx, ky, seed.get(kx, ky) + step);
        minus.set(kx, ky, seed.get(kx, ky) - step);
        let (a, b) = (run(&plus), run(&minus));
        for y in 0..a.height() {
            for x in 0..a.width() {
                let fd = (a.get(x, y) - b.get(x, y)) / (2.0 * step);
                let want = analytic(w, h, e, kx, ky, x, y);
                worst = worst.max((fd - want).abs());
            }
        }
    }
    assert!(worst <= 1e-6, "worst deviation {worst}");
}

#[test]
fn zero_noise_influence_is_exact_average() {
    // e = 0: every new cell is a plain mean of its filled neighbours
    let g = Grid2D::new(3, 3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
    let noise = vec![0.9; 25];
    let out = one_ds(&g, 0.0, &mut InjectedNoise::new(&noise)).unwrap();
    assert_eq!(out.get(1, 1), 0.5);
    assert_eq!(out.get(2, 2), 0.0);
    // border square cell (1, 0): neighbours (0,0)=0, (2,0)=1, (1,1)=0.5
    assert!((out.get(1, 0) - 0.5).abs() < 1e-15);
}
