use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Result};
use fractaug_core::plasma::oracle::{noise_len, recursive_ds_oracle};
use fractaug_core::plasma::{ds_with, steps_for_side, Execution, PlasmaParams, PLASMA_STREAM};
use fractaug_core::rng::NoiseSource;
use fractaug_core::RandSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchImpl {
    Conv,
    ConvParallel,
    Recursive,
}

impl BenchImpl {
    pub fn label(self) -> &'static str {
        match self {
            BenchImpl::Conv => "conv",
            BenchImpl::ConvParallel => "conv-parallel",
            BenchImpl::Recursive => "recursive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "conv" => BenchImpl::Conv,
            "conv-parallel" => BenchImpl::ConvParallel,
            "recursive" => BenchImpl::Recursive,
            _ => bail!("unknown implementation '{s}' (conv, conv-parallel, recursive)"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Side lengths, each of the form 2^n + 1 with n >= 2.
    pub sides: Vec<usize>,
    pub impls: Vec<BenchImpl>,
    pub repeats: usize,
    pub roughness: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            sides: vec![65, 129, 257, 513, 1025],
            impls: vec![BenchImpl::Conv, BenchImpl::Recursive],
            repeats: 5,
            roughness: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub implementation: &'static str,
    pub side: usize,
    /// `None` when the run was skipped (the grid could not be allocated).
    pub median_s: Option<f64>,
}

impl BenchRecord {
    pub fn pixels_per_s(&self) -> Option<f64> {
        self.median_s.map(|t| (self.side * self.side) as f64 / t)
    }
}

/// Sides `2^n + 1` from `lo` to `hi` inclusive.
pub fn sides_between(lo: usize, hi: usize) -> Vec<usize> {
    (2..=20)
        .map(|n| (1usize << n) + 1)
        .filter(|s| (lo..=hi).contains(s))
        .collect()
}

fn check_side(side: usize) -> Result<u32> {
    let steps = steps_for_side(side);
    if side < 5 || (1usize << (steps + 1)) + 1 != side {
        bail!("side {side} is not of the form 2^n + 1 with n >= 2");
    }
    Ok(steps)
}

/// Whether a few grids of this side can be allocated.
fn fits(side: usize) -> bool {
    let mut v: Vec<f64> = Vec::new();
    v.try_reserve_exact(side * side * 4).is_ok()
}

fn run_once(imp: BenchImpl, steps: u32, roughness: f64, seed: u64) -> Result<f64> {
    let p = PlasmaParams::new(steps, roughness, seed);
    let t0 = Instant::now();
    let g = match imp {
        BenchImpl::Conv => ds_with(&p, Execution::Serial)?,
        BenchImpl::ConvParallel => ds_with(&p, Execution::Parallel)?,
        BenchImpl::Recursive => {
            // noise generation is part of the work, as for the conv lanes
            let mut noise = vec![0.0; noise_len(steps)];
            RandSource::new(seed, PLASMA_STREAM).fill_unit(&mut noise)?;
            recursive_ds_oracle(&p, &noise)?
        }
    };
    let dt = t0.elapsed().as_secs_f64();
    std::hint::black_box(g.get(0, 0));
    Ok(dt)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Times every (implementation, side) cell: one warm-up run, then the
/// median of `repeats` timed runs.
pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    if opts.repeats == 0 {
        bail!("repeats must be at least 1");
    }
    let mut out = Vec::new();
    for &imp in &opts.impls {
        for &side in &opts.sides {
            let steps = check_side(side)?;
            if !fits(side) {
                out.push(BenchRecord {
                    implementation: imp.label(),
                    side,
                    median_s: None,
                });
                continue;
            }
            run_once(imp, steps, opts.roughness, 0)?;
            let times = (0..opts.repeats)
                .map(|i| run_once(imp, steps, opts.roughness, i as u64 + 1))
                .collect::<Result<Vec<_>>>()?;
            out.push(BenchRecord {
                implementation: imp.label(),
                side,
                median_s: Some(median(times).max(f64::MIN_POSITIVE)),
            });
        }
    }
    Ok(out)
}

/// `impl,side,median_s,pixels_per_s`; skipped cells carry `skipped` and an
/// empty throughput.
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from("impl,side,median_s,pixels_per_s\n");
    for r in records {
        match (r.median_s, r.pixels_per_s()) {
            (Some(t), Some(p)) => writeln!(s, "{},{},{:.9},{:.1}", r.implementation, r.side, t, p),
            _ => writeln!(s, "{},{},skipped,", r.implementation, r.side),
        }
        .expect("writing to a String");
    }
    s
}
