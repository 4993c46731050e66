use crate::error::{Error, Result};

/// Dense row-major scalar raster. Index `(x, y)` lives at `y * width + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid2D {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("grid dimensions must be non-zero"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "grid data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Grid2D {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Grid2D {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid2D {
            width,
            height,
            data,
        }
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

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Grid2D> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::invalid(format!(
                "crop {}x{}+{}+{} outside {}x{} grid",
                width, height, x0, y0, self.width, self.height
            )));
        }
        Ok(Grid2D::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y)))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Min-max rescale to `[0, 1]`; a constant grid maps to 0.5 everywhere.
    pub fn normalized(&self) -> Grid2D {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        let data = if span > 0.0 {
            self.data
                .iter()
                .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
                .collect()
        } else {
            vec![0.5; self.data.len()]
        };
        Grid2D {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Mean absolute 5-point Laplacian over interior cells. A cheap proxy
    /// for how much high-frequency energy a field carries.
    pub fn mean_abs_laplacian(&self) -> f64 {
        if self.width < 3 || self.height < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for y in 1..self.height - 1 {
            for x in 1..self.width - 1 {
                let lap = self.get(x - 1, y) + self.get(x + 1, y) + self.get(x, y - 1)
                    + self.get(x, y + 1)
                    - 4.0 * self.get(x, y);
                acc += lap.abs();
            }
        }
        acc / ((self.width - 2) * (self.height - 2)) as f64
    }

    pub fn max_abs_diff(&self, other: &Grid2D) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths() {
        assert!(Grid2D::new(3, 3, vec![0.0; 8]).is_err());
        assert!(Grid2D::new(0, 3, vec![]).is_err());
        assert!(Grid2D::new(3, 2, vec![0.0; 6]).is_ok());
    }

    #[test]
    fn normalize_constant_and_range() {
        let g = Grid2D::filled(4, 4, 3.0).normalized();
        assert!(g.data().iter().all(|&v| v == 0.5));

        let g = Grid2D::from_fn(5, 3, |x, y| (x * 7 + y) as f64 - 4.0).normalized();
        assert_eq!(g.min_max(), (0.0, 1.0));
    }

    #[test]
    fn crop_window() {
        let g = Grid2D::from_fn(5, 5, |x, y| (10 * y + x) as f64);
        let c = g.crop(1, 2, 3, 2).unwrap();
        assert_eq!(c.data(), &[21.0, 22.0, 23.0, 31.0, 32.0, 33.0]);
        assert!(g.crop(3, 0, 3, 1).is_err());
    }

    #[test]
    fn laplacian_of_plane_is_zero() {
        let g = Grid2D::from_fn(6, 6, |x, y| 0.3 * x as f64 - 0.1 * y as f64);
        assert!(g.mean_abs_laplacian() < 1e-12);
    }
}
