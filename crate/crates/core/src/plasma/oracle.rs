//! Classical in-place diamond-square, used as a reference for the
//! convolutional generator and as the "recursive" benchmark lane.
//!
//! The grid is allocated at its final size up front and refined with a
//! halving stride, touching cells sparsely. Noise is read from a plain slice
//! in the same documented order as the convolutional path.

use crate::error::{Error, Result};
use crate::grid::Grid2D;

use super::{roughness_schedule, side_for_steps, PlasmaParams};

/// Number of noise values a `steps`-level run consumes: 9 for the seed plus
/// `w * h` for every level producing a `w x h` grid.
pub fn noise_len(steps: u32) -> usize {
    9 + (1..=steps)
        .map(|s| side_for_steps(s) * side_for_steps(s))
        .sum::<usize>()
}

pub fn recursive_ds_oracle(params: &PlasmaParams, noise: &[f64]) -> Result<Grid2D> {
    params.validate()?;
    recursive_ds_with_schedule(&roughness_schedule(params.steps, params.roughness), noise)
}

/// Same as [`recursive_ds_oracle`] with an explicit per-level `e`.
pub fn recursive_ds_with_schedule(schedule: &[f64], noise: &[f64]) -> Result<Grid2D> {
    let steps = schedule.len() as u32;
    if steps == 0 {
        return Err(Error::invalid("schedule must have at least one level"));
    }
    if schedule.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::invalid("every e must lie in [0, 1]"));
    }
    let need = noise_len(steps);
    if noise.len() < need {
        return Err(Error::invalid(format!(
            "oracle needs {need} noise values, got {}",
            noise.len()
        )));
    }

    let n = side_for_steps(steps);
    let mut g = vec![0.0f64; n * n];
    let mut draws = noise.iter().copied();
    let mut next = move || draws.next().expect("length checked above");

    let mut step = (n - 1) / 2;
    for y in 0..3 {
        for x in 0..3 {
            g[y * step * n + x * step] = next();
        }
    }

    for &e in schedule {
        let half = step / 2;

        for y in (0..n).step_by(step) {
            for x in (0..n).step_by(step) {
                g[y * n + x] += e * next();
            }
        }

        for y in (half..n).step_by(step) {
            for x in (half..n).step_by(step) {
                let sum = g[(y - half) * n + x - half]
                    + g[(y - half) * n + x + half]
                    + g[(y + half) * n + x - half]
                    + g[(y + half) * n + x + half];
                g[y * n + x] = (1.0 - e) * (sum / 4.0) + e * next();
            }
        }

        for (row, y) in (0..n).step_by(half).enumerate() {
            let first = if row % 2 == 0 { half } else { 0 };
            for x in (first..n).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if y >= half {
                    sum += g[(y - half) * n + x];
                    count += 1.0;
                }
                if y + half < n {
                    sum += g[(y + half) * n + x];
                    count += 1.0;
                }
                if x >= half {
                    sum += g[y * n + x - half];
                    count += 1.0;
                }
                if x + half < n {
                    sum += g[y * n + x + half];
                    count += 1.0;
                }
                g[y * n + x] = (1.0 - e) * (sum / count) + e * next();
            }
        }

        step = half;
    }
    Grid2D::new(n, n, g)
}
