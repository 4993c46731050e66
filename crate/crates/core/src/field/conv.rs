use rayon::prelude::*;

use crate::grid::Grid2D;

/// 3x3 kernel, indexed `[row][col]` with the centre at `[1][1]`.
pub type Kernel3 = [[f64; 3]; 3];

/// Same-size 3x3 correlation with zero padding: taps outside the grid read 0.
///
/// `out(x, y) = sum k[dy+1][dx+1] * g(x+dx, y+dy)`. All kernels used in this
/// crate are symmetric, so correlation and convolution coincide.
pub fn conv3x3(grid: &Grid2D, kernel: &Kernel3) -> Grid2D {
    let (w, h) = (grid.width(), grid.height());
    let mut out = vec![0.0; w * h];
    for (y, row) in out.chunks_exact_mut(w).enumerate() {
        conv_row(grid, kernel, y, row);
    }
    Grid2D::new(w, h, out).expect("shape preserved")
}

/// Row-parallel [`conv3x3`]. Each output row is computed by the same code as
/// the serial version, so results are bit-identical for any thread count.
pub fn conv3x3_par(grid: &Grid2D, kernel: &Kernel3) -> Grid2D {
    let (w, h) = (grid.width(), grid.height());
    let mut out = vec![0.0; w * h];
    out.par_chunks_exact_mut(w)
        .enumerate()
        .for_each(|(y, row)| conv_row(grid, kernel, y, row));
    Grid2D::new(w, h, out).expect("shape preserved")
}

fn conv_row(grid: &Grid2D, kernel: &Kernel3, y: usize, out: &mut [f64]) {
    let (w, h) = (grid.width(), grid.height());
    let data = grid.data();
    for (ky, krow) in kernel.iter().enumerate() {
        let sy = y as isize + ky as isize - 1;
        if sy < 0 || sy >= h as isize {
            continue;
        }
        let src = &data[sy as usize * w..(sy as usize + 1) * w];
        for (kx, &k) in krow.iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            match kx {
                0 => {
                    for x in 1..w {
                        out[x] += k * src[x - 1];
                    }
                }
                1 => {
                    for x in 0..w {
                        out[x] += k * src[x];
                    }
                }
                _ => {
                    for x in 0..w - 1 {
                        out[x] += k * src[x + 1];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plasma::{DIAMOND_FILTER, SQUARE_FILTER};

    const IDENTITY: Kernel3 = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];

    #[test]
    fn identity_kernel() {
        let g = Grid2D::from_fn(7, 4, |x, y| (x * 3 + y * 11) as f64 * 0.1);
        assert_eq!(conv3x3(&g, &IDENTITY), g);
    }

    #[test]
    fn diamond_filter_impulse() {
        let mut g = Grid2D::zeros(5, 5);
        g.set(2, 2, 1.0);
        let out = conv3x3(&g, &DIAMOND_FILTER);
        for y in 0..5 {
            for x in 0..5 {
                let expect = if [1, 3].contains(&x) && [1, 3].contains(&y) {
                    0.25
                } else {
                    0.0
                };
                assert_eq!(out.get(x, y), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn square_filter_on_ones() {
        let g = Grid2D::filled(5, 5, 1.0);
        let out = conv3x3(&g, &SQUARE_FILTER);
        // interior: four taps of 0.25; edge: three; corner: two
        assert_eq!(out.get(2, 2), 1.0);
        assert_eq!(out.get(0, 2), 0.75);
        assert_eq!(out.get(0, 0), 0.5);
        assert_eq!(out.get(4, 4), 0.5);
    }

    #[test]
    fn tiny_grids() {
        let g = Grid2D::filled(1, 1, 2.0);
        assert_eq!(conv3x3(&g, &IDENTITY).get(0, 0), 2.0);
        assert_eq!(conv3x3(&g, &SQUARE_FILTER).get(0, 0), 0.0);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let g = Grid2D::from_fn(97, 61, |x, y| ((x * 31 + y * 17) % 13) as f64 / 7.0);
        let k = [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]];
        assert_eq!(conv3x3(&g, &k), conv3x3_par(&g, &k));
    }
}
