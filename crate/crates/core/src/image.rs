use crate::error::{CtError, Result};

/// Square pixel grid over `[-R, R]²`, row-major.
///
/// Pixel `(p, q)` (row `p`, column `q`) has its center at
/// `x = R·(2q+1-n)/n`, `y = R·(2p+1-n)/n`, so `y` grows with the row index:
/// row 0 is the top row of a stored image and sits at `y ≈ -R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n_pixels: usize,
    radius: f64,
    values: Vec<f64>,
}

impl Image {
    pub fn zeros(n_pixels: usize, radius: f64) -> Self {
        Self {
            n_pixels,
            radius,
            values: vec![0.0; n_pixels * n_pixels],
        }
    }

    pub fn from_values(n_pixels: usize, radius: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_pixels * n_pixels {
            return Err(CtError::Dimension(format!(
                "image of {n_pixels}² pixels needs {} values, got {}",
                n_pixels * n_pixels,
                values.len()
            )));
        }
        Ok(Self {
            n_pixels,
            radius,
            values,
        })
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.n_pixels + q]
    }

    /// Center coordinate of index `k` along either axis.
    pub fn coordinate(&self, k: usize) -> f64 {
        pixel_coordinate(self.radius, self.n_pixels, k)
    }

    /// `(x, y)` of pixel `(p, q)`.
    pub fn center(&self, p: usize, q: usize) -> (f64, f64) {
        (self.coordinate(q), self.coordinate(p))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

pub(crate) fn pixel_coordinate(radius: f64, n: usize, k: usize) -> f64 {
    radius * (2.0 * k as f64 + 1.0 - n as f64) / n as f64
}
