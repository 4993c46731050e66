//! Raster and geometry substrate shared by the plasma generator and the
//! augmentation operations.

mod conv;
mod homography;
mod sampling;

pub use conv::{conv3x3, conv3x3_par, Kernel3};
pub use homography::Homography;
pub use sampling::{
    compose_fields, identity_field, norm_to_px, px_to_norm, remap_bilinear, remap_mask,
    transform_points, translation_field, validity_mask, SamplingField, VALIDITY_THRESHOLD,
};
pub(crate) use sampling::threshold_validity;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Channel-planar float image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageF {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageF {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be non-zero"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "images carry 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "image data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        Ok(ImageF {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    /// Single-channel image from a grid; values are taken as-is.
    pub fn from_grid(grid: &Grid2D) -> Self {
        ImageF {
            width: grid.width(),
            height: grid.height(),
            channels: 1,
            data: grid.data().to_vec(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width * self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn clamp01(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageF {
        ImageF {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &ImageF) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }
}

/// Single-channel float raster, used for segmentation masks and validity.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskF {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl MaskF {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("mask dimensions must be non-zero"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "mask data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(MaskF {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        MaskF {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self::filled(width, height, 1.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn as_image(&self) -> ImageF {
        ImageF {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data.clone(),
        }
    }

    pub fn from_image(img: &ImageF) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::invalid("masks must be single-channel"));
        }
        Ok(MaskF {
            width: img.width,
            height: img.height,
            data: img.data.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// False once a geometric op has moved the point off the canvas.
    pub in_frame: bool,
}

impl Keypoint {
    pub fn new(x: f64, y: f64) -> Self {
        Keypoint {
            x,
            y,
            in_frame: true,
        }
    }
}

/// Points in pixel coordinates of the image they annotate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Keypoint>,
}

impl PointSet {
    pub fn new(points: Vec<Keypoint>) -> Self {
        PointSet { points }
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Self {
        PointSet {
            points: xy.iter().map(|&(x, y)| Keypoint::new(x, y)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// An image and the annotations that must follow it through augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBundle {
    pub image: ImageF,
    pub mask: Option<MaskF>,
    pub points: Option<PointSet>,
    pub validity: Option<MaskF>,
}

impl SampleBundle {
    pub fn new(image: ImageF) -> Self {
        SampleBundle {
            image,
            mask: None,
            points: None,
            validity: None,
        }
    }

    pub fn with_mask(mut self, mask: MaskF) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn with_points(mut self, points: PointSet) -> Self {
        self.points = Some(points);
        self
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn check_sizes(&self) -> Result<()> {
        let dims = (self.image.width(), self.image.height());
        for (name, m) in [("mask", &self.mask), ("validity", &self.validity)] {
            if let Some(m) = m {
                if (m.width(), m.height()) != dims {
                    return Err(Error::invalid(format!(
                        "{name} is {}x{} but image is {}x{}",
                        m.width(),
                        m.height(),
                        dims.0,
                        dims.1
                    )));
                }
            }
        }
        Ok(())
    }
}
