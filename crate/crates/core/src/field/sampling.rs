//! Sampling fields and backward warping.
//!
//! A [`SamplingField`] stores, for every output pixel, the normalized source
//! coordinate it reads from. Normalized space is pixel-centre aligned: `-1`
//! is the centre of the first pixel and `+1` the centre of the last one, so
//! flips are exact permutations.

use rayon::prelude::*;

use super::homography::Homography;
use super::{ImageF, Keypoint, MaskF, PointSet};
use crate::error::{Error, Result};

/// Remapped validity values at or above this count as valid.
pub const VALIDITY_THRESHOLD: f64 = 0.999;

/// Coordinates this close to a pixel centre are snapped onto it.
const SNAP_EPS: f64 = 1e-9;

#[inline]
pub fn px_to_norm(p: f64, n: usize) -> f64 {
    if n > 1 {
        2.0 * p / (n - 1) as f64 - 1.0
    } else {
        p
    }
}

#[inline]
pub fn norm_to_px(s: f64, n: usize) -> f64 {
    if n > 1 {
        (s + 1.0) * 0.5 * (n - 1) as f64
    } else {
        s
    }
}

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP_EPS {
        r
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingField {
    width: usize,
    height: usize,
    sx: Vec<f64>,
    sy: Vec<f64>,
    /// Closed-form source-pixel -> output-pixel map, when the field has one.
    forward: Option<Homography>,
}

impl SamplingField {
    pub fn new(width: usize, height: usize, sx: Vec<f64>, sy: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("field dimensions must be non-zero"));
        }
        if sx.len() != width * height || sy.len() != width * height {
            return Err(Error::invalid("field planes do not match field size"));
        }
        if sx.iter().chain(&sy).any(|v| !v.is_finite()) {
            return Err(Error::invalid("field coordinates must be finite"));
        }
        Ok(SamplingField {
            width,
            height,
            sx,
            sy,
            forward: None,
        })
    }

    /// Builds a field from a map of output pixel -> source pixel, for a
    /// source of the same size as the output.
    pub fn from_pixel_map(
        width: usize,
        height: usize,
        f: impl Fn(f64, f64) -> (f64, f64),
    ) -> Self {
        let n = width * height;
        let mut sx = Vec::with_capacity(n);
        let mut sy = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                let (px, py) = f(x as f64, y as f64);
                sx.push(px_to_norm(px, width));
                sy.push(px_to_norm(py, height));
            }
        }
        SamplingField {
            width,
            height,
            sx,
            sy,
            forward: None,
        }
    }

    /// Field for a projective warp given as output-pixel -> source-pixel.
    /// The inverse is registered so points transform in closed form.
    pub fn from_homography(width: usize, height: usize, out_to_src: Homography) -> Result<Self> {
        let forward = out_to_src
            .inverse()
            .ok_or_else(|| Error::invalid("homography is not invertible"))?;
        let mut f = Self::from_pixel_map(width, height, |x, y| out_to_src.apply(x, y));
        if f.sx.iter().chain(&f.sy).any(|v| !v.is_finite()) {
            return Err(Error::invalid("homography maps a pixel to infinity"));
        }
        f.forward = Some(forward);
        Ok(f)
    }

    pub fn with_forward(mut self, forward: Option<Homography>) -> Self {
        self.forward = forward;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sx(&self) -> &[f64] {
        &self.sx
    }

    pub fn sy(&self) -> &[f64] {
        &self.sy
    }

    pub fn forward(&self) -> Option<&Homography> {
        self.forward.as_ref()
    }

    /// Source pixel coordinate read by output pixel `(x, y)`, for a source of
    /// the field's own size.
    pub fn source_px(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (
            norm_to_px(self.sx[i], self.width),
            norm_to_px(self.sy[i], self.height),
        )
    }

    pub fn max_abs_diff(&self, other: &SamplingField) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.sx
            .iter()
            .zip(&other.sx)
            .chain(self.sy.iter().zip(&other.sy))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn identity_field(width: usize, height: usize) -> SamplingField {
    SamplingField::from_pixel_map(width, height, |x, y| (x, y)).with_forward(Some(Homography::IDENTITY))
}

/// Field that moves content by `(dx, dy)` pixels.
pub fn translation_field(width: usize, height: usize, dx: f64, dy: f64) -> SamplingField {
    SamplingField::from_pixel_map(width, height, |x, y| (x - dx, y - dy))
        .with_forward(Some(Homography::translation(dx, dy)))
}

/// Bilinear sample with border padding: taps outside the source read `pad`.
#[inline]
fn sample_padded(src: &[f64], w: usize, h: usize, fx: f64, fy: f64, pad: f64) -> f64 {
    if !fx.is_finite() || !fy.is_finite() {
        return pad;
    }
    let (fx, fy) = (snap(fx), snap(fy));
    let (x0, y0) = (fx.floor(), fy.floor());
    let (ax, ay) = (fx - x0, fy - y0);
    if x0 < -1.0 || y0 < -1.0 || x0 > w as f64 || y0 > h as f64 {
        return pad;
    }
    let (x0, y0) = (x0 as isize, y0 as isize);
    let tap = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            pad
        } else {
            src[y as usize * w + x as usize]
        }
    };
    let top = if ax == 0.0 {
        tap(x0, y0)
    } else {
        (1.0 - ax) * tap(x0, y0) + ax * tap(x0 + 1, y0)
    };
    if ay == 0.0 {
        return top;
    }
    let bottom = if ax == 0.0 {
        tap(x0, y0 + 1)
    } else {
        (1.0 - ax) * tap(x0, y0 + 1) + ax * tap(x0 + 1, y0 + 1)
    };
    (1.0 - ay) * top + ay * bottom
}

/// Bilinear sample that extends the boundary cells linearly past the edge.
#[inline]
fn sample_extrapolated(src: &[f64], w: usize, h: usize, fx: f64, fy: f64) -> f64 {
    let axis = |f: f64, n: usize| -> (usize, usize, f64) {
        if n == 1 {
            return (0, 0, 0.0);
        }
        let f = snap(f);
        let i0 = f.floor().clamp(0.0, (n - 2) as f64);
        (i0 as usize, i0 as usize + 1, f - i0)
    };
    let (x0, x1, ax) = axis(fx, w);
    let (y0, y1, ay) = axis(fy, h);
    let p = |x: usize, y: usize| src[y * w + x];
    let top = (1.0 - ax) * p(x0, y0) + ax * p(x1, y0);
    let bottom = (1.0 - ax) * p(x0, y1) + ax * p(x1, y1);
    (1.0 - ay) * top + ay * bottom
}

fn remap_plane(src: &[f64], sw: usize, sh: usize, field: &SamplingField, pad: f64) -> Vec<f64> {
    let w = field.width;
    let mut out = vec![0.0; w * field.height];
    out.par_chunks_exact_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let fx = norm_to_px(field.sx[i], sw);
            let fy = norm_to_px(field.sy[i], sh);
            *o = sample_padded(src, sw, sh, fx, fy, pad);
        }
    });
    out
}

/// Backward warp: output pixel `p` takes the bilinear sample of `img` at
/// `field(p)`; taps outside the source contribute `pad`.
pub fn remap_bilinear(img: &ImageF, field: &SamplingField, pad: f64) -> ImageF {
    let (sw, sh) = (img.width(), img.height());
    let data: Vec<f64> = img
        .planes()
        .flat_map(|plane| remap_plane(plane, sw, sh, field, pad))
        .collect();
    ImageF::new(field.width, field.height, img.channels(), data).expect("shape preserved")
}

pub fn remap_mask(mask: &MaskF, field: &SamplingField, pad: f64) -> MaskF {
    let data = remap_plane(mask.data(), mask.width(), mask.height(), field, pad);
    MaskF::new(field.width, field.height, data).expect("shape preserved")
}

/// Field equivalent to remapping by `inner` and then by `outer`.
///
/// `outer` reads from the intermediate image, whose size is `inner`'s output
/// size, so the two fields must agree in size. Inner coordinates are sampled
/// with linear extrapolation at `outer`'s coordinates, which keeps affine
/// compositions exact even where `outer` looks past the canvas. When both
/// fields are projective the composition is evaluated in closed form.
pub fn compose_fields(outer: &SamplingField, inner: &SamplingField) -> Result<SamplingField> {
    if (outer.width, outer.height) != (inner.width, inner.height) {
        return Err(Error::invalid(format!(
            "cannot compose a {}x{} field with a {}x{} field",
            outer.width, outer.height, inner.width, inner.height
        )));
    }
    // two projective fields compose in closed form
    if let (Some(o), Some(i)) = (outer.forward, inner.forward) {
        let forward = o.then_after(&i);
        if let Some(back) = forward.inverse() {
            if let Ok(mut f) = SamplingField::from_homography(outer.width, outer.height, back) {
                f.forward = Some(forward);
                return Ok(f);
            }
        }
    }
    let (w, h) = (inner.width, inner.height);
    let n = outer.width * outer.height;
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    sx.par_iter_mut()
        .zip(sy.par_iter_mut())
        .enumerate()
        .for_each(|(i, (ox, oy))| {
            let fx = norm_to_px(outer.sx[i], w);
            let fy = norm_to_px(outer.sy[i], h);
            *ox = sample_extrapolated(&inner.sx, w, h, fx, fy);
            *oy = sample_extrapolated(&inner.sy, w, h, fx, fy);
        });
    let forward = match (outer.forward, inner.forward) {
        (Some(o), Some(i)) => Some(o.then_after(&i)),
        _ => None,
    };
    Ok(SamplingField {
        width: outer.width,
        height: outer.height,
        sx,
        sy,
        forward,
    })
}

fn in_canvas(x: f64, y: f64, w: usize, h: usize) -> bool {
    x >= -0.5 && y >= -0.5 && x <= w as f64 - 0.5 && y <= h as f64 - 0.5
}

/// Moves points from source to output coordinates.
///
/// Fields with a registered closed-form map use it directly. Otherwise the
/// output cell whose source coordinate is nearest the point is located
/// (coarse grid, then a local window) and refined with one Newton step on
/// the field's local Jacobian.
pub fn transform_points(points: &PointSet, field: &SamplingField) -> PointSet {
    let (w, h) = (field.width, field.height);
    let moved = points
        .points
        .iter()
        .map(|p| {
            let (x, y) = match &field.forward {
                Some(fwd) => fwd.apply(p.x, p.y),
                None => invert_by_search(field, p.x, p.y),
            };
            let ok = x.is_finite() && y.is_finite();
            Keypoint {
                x,
                y,
                in_frame: p.in_frame && ok && in_canvas(x, y, w, h),
            }
        })
        .collect();
    PointSet::new(moved)
}

fn invert_by_search(field: &SamplingField, px: f64, py: f64) -> (f64, f64) {
    let (w, h) = (field.width, field.height);
    let dist2 = |x: usize, y: usize| {
        let (sx, sy) = field.source_px(x, y);
        (sx - px).powi(2) + (sy - py).powi(2)
    };
    let stride = (w.min(h) / 64).max(1);
    let mut best = (0usize, 0usize, f64::INFINITY);
    for y in (0..h).step_by(stride) {
        for x in (0..w).step_by(stride) {
            let d = dist2(x, y);
            if d < best.2 {
                best = (x, y, d);
            }
        }
    }
    if stride > 1 {
        let r = 2 * stride;
        let (cx, cy) = (best.0, best.1);
        for y in cy.saturating_sub(r)..(cy + r + 1).min(h) {
            for x in cx.saturating_sub(r)..(cx + r + 1).min(w) {
                let d = dist2(x, y);
                if d < best.2 {
                    best = (x, y, d);
                }
            }
        }
    }
    let (ox, oy) = (best.0, best.1);
    let (sx0, sy0) = field.source_px(ox, oy);

    // one Newton step on src(o + d) = p
    let diff = |along_x: bool| -> (f64, f64) {
        let (s1, s0, span) = if along_x {
            let (lo, hi) = (ox.saturating_sub(1), (ox + 1).min(w - 1));
            (field.source_px(hi, oy), field.source_px(lo, oy), (hi - lo) as f64)
        } else {
            let (lo, hi) = (oy.saturating_sub(1), (oy + 1).min(h - 1));
            (field.source_px(ox, hi), field.source_px(ox, lo), (hi - lo) as f64)
        };
        if span == 0.0 {
            if along_x {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        } else {
            ((s1.0 - s0.0) / span, (s1.1 - s0.1) / span)
        }
    };
    let (j00, j10) = diff(true);
    let (j01, j11) = diff(false);
    let det = j00 * j11 - j01 * j10;
    let (rx, ry) = (px - sx0, py - sy0);
    if det.abs() < 1e-12 {
        return (ox as f64, oy as f64);
    }
    let dx = (j11 * rx - j01 * ry) / det;
    let dy = (-j10 * rx + j00 * ry) / det;
    (ox as f64 + dx, oy as f64 + dy)
}

/// Binary mask of output pixels whose sample lies wholly inside the source.
pub fn validity_mask(field: &SamplingField) -> MaskF {
    let ones = MaskF::ones(field.width, field.height);
    threshold_validity(&remap_mask(&ones, field, 0.0))
}

pub(crate) fn threshold_validity(m: &MaskF) -> MaskF {
    let data = m
        .data()
        .iter()
        .map(|&v| if v >= VALIDITY_THRESHOLD { 1.0 } else { 0.0 })
        .collect();
    MaskF::new(m.width(), m.height(), data).expect("shape preserved")
}
