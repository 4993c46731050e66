//! Convolutional diamond-square plasma fractals.
//!
//! One refinement level ([`one_ds`]) dilates the current grid by two, jitters
//! the carried-over cells, fills the cell centres from a diagonal (diamond)
//! convolution and then the edge midpoints from an axial (square)
//! convolution. New cells blend the neighbourhood mean with fresh noise:
//! `(1 - e) * mean + e * noise`. [`ds`] repeats this `steps` times starting
//! from a random 3x3 grid, multiplying `e` by the roughness before each level.
//!
//! Border cells see fewer neighbours. Every convolution is normalized by the
//! same convolution of the filled-cell indicator, so each mean is taken over
//! in-bounds, already-filled neighbours only.
//!
//! Noise is consumed in a fixed order so that other implementations can be
//! driven with the same sequence: the 9 seed values, then per level the
//! row-major jitter of carried cells, the row-major diamond cells, and the
//! row-major square cells. A level producing a `w x h` grid consumes exactly
//! `w * h` values.

pub mod oracle;

use crate::error::{Error, Result};
use crate::field::{conv3x3, conv3x3_par, Kernel3};
use crate::grid::Grid2D;
use crate::rng::{NoiseSource, RandSource};

pub use oracle::{noise_len, recursive_ds_oracle, recursive_ds_with_schedule};

pub const DIAMOND_FILTER: Kernel3 = [[0.25, 0.0, 0.25], [0.0, 0.0, 0.0], [0.25, 0.0, 0.25]];
pub const SQUARE_FILTER: Kernel3 = [[0.0, 0.25, 0.0], [0.25, 0.0, 0.25], [0.0, 0.25, 0.0]];

/// Stream id used by [`ds`] when it builds its own [`RandSource`].
pub const PLASMA_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaParams {
    pub steps: u32,
    pub roughness: f64,
    pub seed: u64,
}

impl PlasmaParams {
    pub fn new(steps: u32, roughness: f64, seed: u64) -> Self {
        PlasmaParams {
            steps,
            roughness,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::invalid("plasma needs at least one step"));
        }
        if self.steps > 15 {
            return Err(Error::invalid(format!(
                "{} steps would need a {}-pixel side",
                self.steps,
                side_for_steps(self.steps)
            )));
        }
        check_roughness(self.roughness)
    }

    pub fn side(&self) -> usize {
        side_for_steps(self.steps)
    }
}

pub(crate) fn check_roughness(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("roughness must lie in (0, 1], got {r}")))
    }
}

/// Side length after growing a 3x3 seed `steps` times: `2^(steps+1) + 1`.
pub fn side_for_steps(steps: u32) -> usize {
    (1usize << (steps + 1)) + 1
}

/// Smallest step count (at least 1) whose side covers `side` pixels.
pub fn steps_for_side(side: usize) -> u32 {
    let mut steps = 1;
    while side_for_steps(steps) < side {
        steps += 1;
    }
    steps
}

/// Serial or row-parallel convolutions. Both produce bit-identical grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    Parallel,
}

impl Execution {
    fn conv(self, g: &Grid2D, k: &Kernel3) -> Grid2D {
        match self {
            Execution::Serial => conv3x3(g, k),
            Execution::Parallel => conv3x3_par(g, k),
        }
    }
}

/// One diamond-square level: `w x h -> (2w-1) x (2h-1)`.
pub fn one_ds<N: NoiseSource + ?Sized>(plasma: &Grid2D, e: f64, noise: &mut N) -> Result<Grid2D> {
    one_ds_with(plasma, e, noise, Execution::Serial)
}

pub fn one_ds_with<N: NoiseSource + ?Sized>(
    plasma: &Grid2D,
    e: f64,
    noise: &mut N,
    exec: Execution,
) -> Result<Grid2D> {
    let (ow, oh) = (plasma.width(), plasma.height());
    if ow < 3 || oh < 3 || ow % 2 == 0 || oh % 2 == 0 {
        return Err(Error::invalid(format!(
            "plasma grid must have odd sides of at least 3, got {ow}x{oh}"
        )));
    }
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::invalid(format!("e must lie in [0, 1], got {e}")));
    }
    let (w, h) = (2 * ow - 1, 2 * oh - 1);
    let n_diamond = (ow - 1) * (oh - 1);
    let n_square = w * h - ow * oh - n_diamond;

    let mut jitter = vec![0.0; ow * oh];
    let mut diamond_noise = vec![0.0; n_diamond];
    let mut square_noise = vec![0.0; n_square];
    noise.fill_unit(&mut jitter)?;
    noise.fill_unit(&mut diamond_noise)?;
    noise.fill_unit(&mut square_noise)?;

    let mut dilated = Grid2D::zeros(w, h);
    let mut filled = Grid2D::zeros(w, h);
    for y in 0..oh {
        for x in 0..ow {
            dilated.set(2 * x, 2 * y, plasma.get(x, y) + e * jitter[y * ow + x]);
            filled.set(2 * x, 2 * y, 1.0);
        }
    }

    let d = exec.conv(&dilated, &DIAMOND_FILTER);
    let dn = exec.conv(&filled, &DIAMOND_FILTER);
    let mut k = 0;
    for y in (1..h).step_by(2) {
        for x in (1..w).step_by(2) {
            let mean = d.get(x, y) / dn.get(x, y);
            dilated.set(x, y, (1.0 - e) * mean + e * diamond_noise[k]);
            filled.set(x, y, 1.0);
            k += 1;
        }
    }

    let s = exec.conv(&dilated, &SQUARE_FILTER);
    let sn = exec.conv(&filled, &SQUARE_FILTER);
    let mut k = 0;
    for y in 0..h {
        for x in ((1 - y % 2)..w).step_by(2) {
            let mean = s.get(x, y) / sn.get(x, y);
            dilated.set(x, y, (1.0 - e) * mean + e * square_noise[k]);
            k += 1;
        }
    }
    Ok(dilated)
}

/// Grows `seed` through one level per entry of `schedule`, using that
/// entry as the level's `e`.
pub fn grow<N: NoiseSource + ?Sized>(
    seed: Grid2D,
    schedule: &[f64],
    noise: &mut N,
    exec: Execution,
) -> Result<Grid2D> {
    schedule
        .iter()
        .try_fold(seed, |g, &e| one_ds_with(&g, e, noise, exec))
}

/// The roughness schedule `e_k = roughness^k`, `k = 1..=steps`.
pub fn roughness_schedule(steps: u32, roughness: f64) -> Vec<f64> {
    let mut e = 1.0;
    (0..steps)
        .map(|_| {
            e *= roughness;
            e
        })
        .collect()
}

/// Diamond-square from a random 3x3 seed, drawing every scalar from `noise`.
pub fn ds_from_noise<N: NoiseSource + ?Sized>(
    steps: u32,
    roughness: f64,
    noise: &mut N,
    exec: Execution,
) -> Result<Grid2D> {
    PlasmaParams::new(steps, roughness, 0).validate()?;
    let mut seed = vec![0.0; 9];
    noise.fill_unit(&mut seed)?;
    let seed = Grid2D::new(3, 3, seed)?;
    grow(seed, &roughness_schedule(steps, roughness), noise, exec)
}

/// Unnormalized plasma of side `2^(steps+1)+1`, deterministic in the params.
pub fn ds(params: &PlasmaParams) -> Result<Grid2D> {
    ds_with(params, Execution::Serial)
}

pub fn ds_with(params: &PlasmaParams, exec: Execution) -> Result<Grid2D> {
    params.validate()?;
    let mut rng = RandSource::new(params.seed, PLASMA_STREAM);
    ds_from_noise(params.steps, params.roughness, &mut rng, exec)
}

/// Plasma cropped to `width x height` and min-max normalized to `[0, 1]`.
///
/// Runs [`ds`] at the smallest size covering both dimensions and keeps the
/// top-left window.
pub fn plasma_for_size(
    width: usize,
    height: usize,
    roughness: f64,
    rng: &mut RandSource,
) -> Result<Grid2D> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("plasma size must be non-zero"));
    }
    let steps = steps_for_side(width.max(height));
    let full = ds_from_noise(steps, roughness, rng, Execution::Serial)?;
    let cropped = if full.width() == width && full.height() == height {
        full
    } else {
        full.crop(0, 0, width, height)?
    };
    Ok(cropped.normalized())
}
