use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fractaug_core::dsl::{self, Expr};
use fractaug_core::graph::apply_with_params;
use fractaug_core::io::{self, BitDepth};
use fractaug_core::SampleBundle;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct AugmentOptions {
    pub pipeline: PathBuf,
    pub seed: u64,
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub mask_suffix: String,
    pub points_suffix: String,
    pub emit_validity: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl AugmentOptions {
    pub fn new(pipeline: PathBuf, seed: u64, input_dir: PathBuf, output_dir: PathBuf) -> Self {
        AugmentOptions {
            pipeline,
            seed,
            input_dir,
            output_dir,
            mask_suffix: "_mask".into(),
            points_suffix: "_points".into(),
            emit_validity: false,
            threads: None,
        }
    }
}

#[derive(Debug)]
pub struct AugmentReport {
    /// Applied parameters per input file, keyed by file name.
    pub manifest: Value,
    pub processed: usize,
    pub errors: Vec<(String, String)>,
}

/// Seed for one input file: the first 8 bytes (little endian) of
/// SHA-256(root seed as 8 LE bytes || file name). Independent of the order
/// in which files are visited.
pub fn file_seed(root: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Pipeline errors abort before any file is touched; per-file errors are
/// collected in the report.
pub fn augment(opts: &AugmentOptions) -> Result<AugmentReport> {
    let text = std::fs::read_to_string(&opts.pipeline)
        .with_context(|| format!("reading {}", opts.pipeline.display()))?;
    let ast = dsl::parse(&text).map_err(|e| anyhow!("{}:{e}", opts.pipeline.display()))?;
    std::fs::create_dir_all(&opts.output_dir)
        .with_context(|| format!("creating {}", opts.output_dir.display()))?;
    let inputs = list_inputs(opts)?;

    let run = || -> Vec<(String, Result<Value>)> {
        inputs
            .par_iter()
            .map(|name| (name.clone(), process(opts, &ast, name)))
            .collect()
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .context("building thread pool")?
            .install(run),
        None => run(),
    };

    let mut files = BTreeMap::new();
    let mut errors = Vec::new();
    for (name, r) in results {
        match r {
            Ok(v) => {
                files.insert(name, v);
            }
            Err(e) => errors.push((name, format!("{e:#}"))),
        }
    }
    errors.sort();
    let manifest = json!({
        "pipeline": dsl::format(&ast),
        "seed": opts.seed,
        "files": files,
    });
    Ok(AugmentReport {
        processed: files_len(&manifest),
        manifest,
        errors,
    })
}

fn files_len(m: &Value) -> usize {
    m["files"].as_object().map_or(0, |o| o.len())
}

/// PNG files in the input directory that are not masks, sorted by name.
fn list_inputs(opts: &AugmentOptions) -> Result<Vec<String>> {
    let mut names = Vec::new();
    let mask_end = format!("{}.png", opts.mask_suffix);
    for entry in std::fs::read_dir(&opts.input_dir)
        .with_context(|| format!("listing {}", opts.input_dir.display()))?
    {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let is_png = Path::new(&name)
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png || (!opts.mask_suffix.is_empty() && name.ends_with(&mask_end)) {
            continue;
        }
        if entry.file_type()?.is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn process(opts: &AugmentOptions, ast: &Expr, name: &str) -> Result<Value> {
    let stem = Path::new(name)
        .file_stem()
        .ok_or_else(|| anyhow!("no file stem"))?
        .to_string_lossy()
        .into_owned();
    let src = opts.input_dir.join(name);
    let loaded = io::read_png(&src).with_context(|| format!("reading {}", src.display()))?;
    let mut bundle = SampleBundle::new(loaded.image);

    let mask_path = opts.input_dir.join(format!("{stem}{}.png", opts.mask_suffix));
    let mut mask_depth = BitDepth::Eight;
    if mask_path.is_file() {
        let (m, d) = io::read_mask(&mask_path)
            .with_context(|| format!("reading {}", mask_path.display()))?;
        bundle.mask = Some(m);
        mask_depth = d;
    }
    let points_path = opts.input_dir.join(format!("{stem}{}.csv", opts.points_suffix));
    if points_path.is_file() {
        let text = std::fs::read_to_string(&points_path)?;
        bundle.points = Some(
            io::read_points_csv(&text).with_context(|| format!("reading {}", points_path.display()))?,
        );
    }
    bundle
        .check_sizes()
        .with_context(|| format!("{name}: annotations do not match the image"))?;

    let seed = file_seed(opts.seed, name);
    let graph = dsl::compile(ast, seed);
    let (out, applied) = apply_with_params(&graph, &bundle)?;

    let dir = &opts.output_dir;
    io::write_png(&dir.join(name), &out.image, loaded.depth)?;
    if let Some(m) = &out.mask {
        std::fs::write(
            dir.join(format!("{stem}{}.png", opts.mask_suffix)),
            io::encode_mask(m, mask_depth)?,
        )?;
    }
    if let Some(p) = &out.points {
        std::fs::write(
            dir.join(format!("{stem}{}.csv", opts.points_suffix)),
            io::points_to_csv(p),
        )?;
    }
    if opts.emit_validity {
        let v = out.validity.as_ref().expect("apply sets validity");
        std::fs::write(
            dir.join(format!("{stem}_validity.png")),
            io::encode_mask(v, BitDepth::Eight)?,
        )?;
    }
    Ok(json!({ "seed": seed, "applied": applied }))
}

/// Validates suffix flags up front so they cannot escape the output folder.
pub fn check_suffix(s: &str) -> Result<()> {
    if s.contains('/') || s.contains('\\') {
        bail!("suffix '{s}' must not contain path separators");
    }
    Ok(())
}
