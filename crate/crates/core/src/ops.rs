//! The augmentation catalog.
//!
//! Dorsal operations rewrite pixel values in place and touch only the image.
//! Ventral operations move content; they are expressed as a
//! [`SamplingField`] so that images, masks and points all follow the same
//! geometry.
//!
//! Default distributions are engine defaults chosen to give visible but
//! plausible distortions; none of them is a published magnitude.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{identity_field, px_to_norm, Homography, ImageF, SamplingField};
use crate::graph::DistSpec;
use crate::plasma::{check_roughness, plasma_for_size};
use crate::rng::RandSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Dorsal,
    Ventral,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub label: &'static str,
    pub default: DistSpec,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpDescriptor {
    pub name: &'static str,
    pub kind: OpKind,
    pub summary: &'static str,
    pub params: Vec<ParamSchema>,
}

impl OpDescriptor {
    pub fn param(&self, name: &str) -> Option<&ParamSchema> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Checks a parameter map against the schema and fills in defaults.
    /// Errors carry the offending parameter name.
    pub fn complete_params(
        &self,
        given: &BTreeMap<String, DistSpec>,
    ) -> std::result::Result<BTreeMap<String, DistSpec>, (String, ParamError)> {
        for (name, dist) in given {
            let schema = self
                .param(name)
                .ok_or_else(|| (name.clone(), ParamError::Unknown))?;
            dist.validate()
                .map_err(|m| (name.clone(), ParamError::Invalid(m)))?;
            let (lo, hi) = dist.support();
            if lo < schema.min || hi > schema.max {
                return Err((
                    name.clone(),
                    ParamError::OutOfBounds {
                        min: schema.min,
                        max: schema.max,
                    },
                ));
            }
        }
        Ok(self
            .params
            .iter()
            .map(|p| {
                let d = given.get(p.name).cloned().unwrap_or_else(|| p.default.clone());
                (p.name.to_string(), d)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    Unknown,
    Invalid(String),
    OutOfBounds { min: f64, max: f64 },
}

impl std::fmt::Display for ParamError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamError::Unknown => write!(f, "unknown parameter"),
            ParamError::Invalid(m) => write!(f, "{m}"),
            ParamError::OutOfBounds { min, max } => {
                write!(f, "values must stay within [{min}, {max}]")
            }
        }
    }
}

fn roughness_param() -> ParamSchema {
    ParamSchema {
        name: "roughness",
        label: "Plasma roughness",
        default: DistSpec::uniform(0.2, 0.7),
        min: 0.01,
        max: 1.0,
    }
}

static CATALOG: LazyLock<Vec<OpDescriptor>> = LazyLock::new(|| {
    vec![
        OpDescriptor {
            name: "brightness_global",
            kind: OpKind::Dorsal,
            summary: "Adds a constant offset to every pixel.",
            params: vec![ParamSchema {
                name: "delta",
                label: "Brightness offset",
                default: DistSpec::uniform(-0.2, 0.2),
                min: -1.0,
                max: 1.0,
            }],
        },
        OpDescriptor {
            name: "gaussian_noise",
            kind: OpKind::Dorsal,
            summary: "Adds independent Gaussian noise to every pixel.",
            params: vec![ParamSchema {
                name: "sigma",
                label: "Noise standard deviation",
                default: DistSpec::uniform(0.0, 0.05),
                min: 0.0,
                max: 1.0,
            }],
        },
        OpDescriptor {
            name: "linear_color",
            kind: OpKind::Dorsal,
            summary: "Maps every value v to a*v + b.",
            params: vec![
                ParamSchema {
                    name: "a",
                    label: "Gain",
                    default: DistSpec::uniform(0.8, 1.2),
                    min: -2.0,
                    max: 2.0,
                },
                ParamSchema {
                    name: "b",
                    label: "Offset",
                    default: DistSpec::uniform(-0.1, 0.1),
                    min: -1.0,
                    max: 1.0,
                },
            ],
        },
        OpDescriptor {
            name: "plasma_brightness",
            kind: OpKind::Dorsal,
            summary: "Adds a plasma-shaped brightness offset in [-strength, strength].",
            params: vec![
                ParamSchema {
                    name: "strength",
                    label: "Offset amplitude",
                    default: DistSpec::uniform(0.0, 0.5),
                    min: 0.0,
                    max: 1.0,
                },
                roughness_param(),
            ],
        },
        OpDescriptor {
            name: "plasma_shadow",
            kind: OpKind::Dorsal,
            summary: "Darkens the image multiplicatively along a plasma.",
            params: vec![
                ParamSchema {
                    name: "strength",
                    label: "Shadow depth",
                    default: DistSpec::uniform(0.0, 0.5),
                    min: 0.0,
                    max: 1.0,
                },
                roughness_param(),
            ],
        },
        OpDescriptor {
            name: "hflip",
            kind: OpKind::Ventral,
            summary: "Mirrors the image left to right.",
            params: vec![],
        },
        OpDescriptor {
            name: "vflip",
            kind: OpKind::Ventral,
            summary: "Mirrors the image top to bottom.",
            params: vec![],
        },
        OpDescriptor {
            name: "perspective",
            kind: OpKind::Ventral,
            summary: "Projective warp moving each canvas corner by up to corner_jitter * min(W, H).",
            params: vec![ParamSchema {
                name: "corner_jitter",
                label: "Corner displacement (fraction of the short side)",
                default: DistSpec::constant(0.1),
                min: 0.0,
                max: 0.25,
            }],
        },
        OpDescriptor {
            name: "plasma_warp",
            kind: OpKind::Ventral,
            summary: "Elastic displacement driven by two plasmas, at most `strength` pixels per axis.",
            params: vec![
                ParamSchema {
                    name: "strength",
                    label: "Maximum displacement (pixels)",
                    default: DistSpec::uniform(0.0, 12.0),
                    min: 0.0,
                    max: 64.0,
                },
                roughness_param(),
            ],
        },
    ]
});

/// Every registered operation, in a stable order.
pub fn catalog() -> &'static [OpDescriptor] {
    &CATALOG
}

pub fn descriptor(name: &str) -> Option<&'static OpDescriptor> {
    CATALOG.iter().find(|d| d.name == name)
}

pub fn catalog_json() -> serde_json::Value {
    serde_json::to_value(catalog()).expect("catalog serializes")
}

pub fn brightness_global(img: &ImageF, delta: f64) -> ImageF {
    img.map(|v| (v + delta).clamp(0.0, 1.0))
}

pub fn gaussian_noise(img: &ImageF, sigma: f64, rng: &mut RandSource) -> ImageF {
    if sigma == 0.0 {
        return img.clone();
    }
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = (*v + sigma * rng.gaussian()).clamp(0.0, 1.0);
    }
    out
}

pub fn linear_color(img: &ImageF, a: f64, b: f64) -> ImageF {
    img.map(|v| (a * v + b).clamp(0.0, 1.0))
}

/// `clamp(img + strength * (2P - 1))` with `P` a normalized plasma.
pub fn plasma_brightness(
    img: &ImageF,
    strength: f64,
    roughness: f64,
    rng: &mut RandSource,
) -> Result<ImageF> {
    let p = plasma_for_size(img.width(), img.height(), roughness, rng)?;
    Ok(per_pixel(img, p.data(), |v, p| {
        (v + strength * (2.0 * p - 1.0)).clamp(0.0, 1.0)
    }))
}

/// `img * (1 - strength * P)` with `P` a normalized plasma.
pub fn plasma_shadow(
    img: &ImageF,
    strength: f64,
    roughness: f64,
    rng: &mut RandSource,
) -> Result<ImageF> {
    let p = plasma_for_size(img.width(), img.height(), roughness, rng)?;
    Ok(per_pixel(img, p.data(), |v, p| {
        (v * (1.0 - strength * p)).clamp(0.0, 1.0)
    }))
}

fn per_pixel(img: &ImageF, plane: &[f64], f: impl Fn(f64, f64) -> f64) -> ImageF {
    let mut out = img.clone();
    let n = plane.len();
    for chunk in out.data_mut().chunks_exact_mut(n) {
        for (v, &p) in chunk.iter_mut().zip(plane) {
            *v = f(*v, p);
        }
    }
    out
}

pub fn flip_h(width: usize, height: usize) -> SamplingField {
    let m = Homography::axis_affine(-1.0, (width - 1) as f64, 1.0, 0.0);
    SamplingField::from_homography(width, height, m).expect("flips are invertible")
}

pub fn flip_v(width: usize, height: usize) -> SamplingField {
    let m = Homography::axis_affine(1.0, 0.0, -1.0, (height - 1) as f64);
    SamplingField::from_homography(width, height, m).expect("flips are invertible")
}

const PERSPECTIVE_ATTEMPTS: usize = 8;

/// Projective warp sending the canvas corners to randomly displaced corners.
pub fn perspective(
    width: usize,
    height: usize,
    corner_jitter: f64,
    rng: &mut RandSource,
) -> Result<SamplingField> {
    if !(0.0..=0.25).contains(&corner_jitter) {
        return Err(Error::invalid(format!(
            "corner_jitter must lie in [0, 0.25], got {corner_jitter}"
        )));
    }
    if corner_jitter == 0.0 || width < 2 || height < 2 {
        return Ok(identity_field(width, height));
    }
    let (wm, hm) = ((width - 1) as f64, (height - 1) as f64);
    let corners = [(0.0, 0.0), (wm, 0.0), (wm, hm), (0.0, hm)];
    let amp = corner_jitter * width.min(height) as f64;
    for _ in 0..PERSPECTIVE_ATTEMPTS {
        let mut moved = corners;
        for c in moved.iter_mut() {
            c.0 += rng.uniform(-amp, amp);
            c.1 += rng.uniform(-amp, amp);
        }
        let Some(src_to_out) = Homography::from_quad(&corners, &moved) else {
            continue;
        };
        let Some(out_to_src) = src_to_out.inverse() else {
            continue;
        };
        // the warp must not fold the canvas: the homogeneous weight keeps one
        // sign over the output corners
        let w: Vec<f64> = corners.iter().map(|&(x, y)| out_to_src.weight(x, y)).collect();
        let folds = w.iter().any(|&v| v.abs() < 1e-9) || !(w.iter().all(|&v| v > 0.0) || w.iter().all(|&v| v < 0.0));
        if folds {
            continue;
        }
        if let Ok(f) = SamplingField::from_homography(width, height, out_to_src) {
            return Ok(f);
        }
    }
    Err(Error::config(
        "",
        format!("perspective draw was degenerate {PERSPECTIVE_ATTEMPTS} times in a row"),
    ))
}

/// Elastic warp: each output pixel reads from `p + d`, where both components
/// of `d` are `2 * strength * (P - 0.5)` for independent plasmas `P`.
pub fn plasma_warp(
    width: usize,
    height: usize,
    strength: f64,
    roughness: f64,
    rng: &mut RandSource,
) -> Result<SamplingField> {
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::invalid(format!("warp strength must be >= 0, got {strength}")));
    }
    check_roughness(roughness)?;
    if strength == 0.0 {
        return Ok(identity_field(width, height));
    }
    let px = plasma_for_size(width, height, roughness, rng)?;
    let py = plasma_for_size(width, height, roughness, rng)?;
    let n = width * height;
    let mut sx = Vec::with_capacity(n);
    let mut sy = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            let dx = 2.0 * strength * (px.get(x, y) - 0.5);
            let dy = 2.0 * strength * (py.get(x, y) - 0.5);
            sx.push(px_to_norm(x as f64 + dx, width));
            sy.push(px_to_norm(y as f64 + dy, height));
        }
    }
    SamplingField::new(width, height, sx, sy)
}

fn value(values: &BTreeMap<String, f64>, op: &str, name: &str) -> Result<f64> {
    values
        .get(name)
        .copied()
        .ok_or_else(|| Error::config("", format!("{op}: missing parameter '{name}'")))
}

/// Runs a dorsal op by name with concrete parameter values.
pub fn run_dorsal(
    op: &str,
    values: &BTreeMap<String, f64>,
    img: &ImageF,
    rng: &mut RandSource,
) -> Result<ImageF> {
    let v = |name: &str| value(values, op, name);
    match op {
        "brightness_global" => Ok(brightness_global(img, v("delta")?)),
        "gaussian_noise" => Ok(gaussian_noise(img, v("sigma")?, rng)),
        "linear_color" => Ok(linear_color(img, v("a")?, v("b")?)),
        "plasma_brightness" => plasma_brightness(img, v("strength")?, v("roughness")?, rng),
        "plasma_shadow" => plasma_shadow(img, v("strength")?, v("roughness")?, rng),
        _ => Err(Error::config("", format!("'{op}' is not a dorsal operation"))),
    }
}

/// Runs a ventral op by name, producing its sampling field.
pub fn run_ventral(
    op: &str,
    values: &BTreeMap<String, f64>,
    width: usize,
    height: usize,
    rng: &mut RandSource,
) -> Result<SamplingField> {
    let v = |name: &str| value(values, op, name);
    match op {
        "hflip" => Ok(flip_h(width, height)),
        "vflip" => Ok(flip_v(width, height)),
        "perspective" => perspective(width, height, v("corner_jitter")?, rng),
        "plasma_warp" => plasma_warp(width, height, v("strength")?, v("roughness")?, rng),
        _ => Err(Error::config("", format!("'{op}' is not a ventral operation"))),
    }
}
