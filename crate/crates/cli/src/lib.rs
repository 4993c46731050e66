//! Library side of the `fractaug` command: batch augmentation, plasma
//! rendering and the diamond-square benchmark.

pub mod augment;
pub mod bench;

use std::path::Path;

use anyhow::{Context, Result};
use fractaug_core::io;
use fractaug_core::plasma::{ds, PlasmaParams};

pub use augment::{augment, file_seed, AugmentOptions, AugmentReport};
pub use bench::{run_bench, BenchImpl, BenchOptions, BenchRecord};

/// Renders a normalized plasma to a 16-bit grayscale PNG.
pub fn render_plasma(steps: u32, roughness: f64, seed: u64, out: &Path) -> Result<()> {
    let grid = ds(&PlasmaParams::new(steps, roughness, seed))?.normalized();
    let png = io::encode_grid_png16(&grid)?;
    std::fs::write(out, png).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}
