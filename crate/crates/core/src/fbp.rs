//! Discrete filtered back projection
//!
//! ```text
//! f_FBP(x, y) = ½ · (1/N_φ) Σ_j I[(F⁻¹A_L ∗_D g)(·, φ_j)](x cos φ_j + y sin φ_j)
//! (F⁻¹A_L ∗_D g)(s_l, φ_j) = h Σ_i K(l - i) g(i, j),  K(m) = F⁻¹A_L(m·h)
//! ```
//!
//! `K` is the trapezoid quadrature of the inverse Fourier integral on the
//! filter's frequency grid, so the convolution is one zero-padded FFT per
//! angle.

use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CtError, Result};
use crate::filters::FilterSpec;
use crate::geometry::{FrequencyGrid, ParallelGeometry, Sinogram};
use crate::image::{pixel_coordinate, Image};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Linear,
    /// Natural cubic spline through the filtered samples of each angle.
    CubicSpline,
}

impl FromStr for Interpolation {
    type Err = CtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Interpolation::Linear),
            "cubic" | "cubic_spline" | "spline" => Ok(Interpolation::CubicSpline),
            other => Err(CtError::Parameter(format!(
                "unknown interpolation {other:?} (expected linear or cubic)"
            ))),
        }
    }
}

/// Filtered rows on the extended radial index set `l = -M_ext..=M_ext`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSinogram {
    geometry: ParallelGeometry,
    half_count: usize,
    values: Vec<f64>,
}

impl FilteredSinogram {
    /// Rows built directly from values, angle-major with `2·half_count + 1`
    /// samples per angle.
    pub fn from_values(geometry: ParallelGeometry, half_count: usize, values: Vec<f64>) -> Result<Self> {
        let expected = (2 * half_count + 1) * geometry.n_angles();
        if values.len() != expected {
            return Err(CtError::Dimension(format!(
                "filtered sinogram needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            geometry,
            half_count,
            values,
        })
    }

    pub fn geometry(&self) -> &ParallelGeometry {
        &self.geometry
    }

    /// `M_ext`.
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn n_radial(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.n_radial();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn get(&self, l: i64, j: usize) -> f64 {
        self.row(j)[(l + self.half_count as i64) as usize]
    }
}

/// Filters every angle with `A_L` and samples the result on `|l| ≤ M_ext`.
pub fn filter_rows(
    sinogram: &Sinogram,
    filter: &FilterSpec,
    grid: &FrequencyGrid,
) -> Result<FilteredSinogram> {
    let geom = sinogram.geometry();
    if filter.grid() != grid {
        return Err(CtError::Dimension(
            "filter was sampled on a different frequency grid".into(),
        ));
    }
    grid.check_geometry(geom)?;
    let m_ext = geom.extended_half_count();
    let n_out = 2 * m_ext + 1;
    let p = grid.pad_length();
    if p < n_out {
        return Err(CtError::Dimension(format!(
            "pad length {p} cannot hold the {n_out} extended radial samples"
        )));
    }

    // trapezoid-weighted filter folded onto FFT bins
    let mut weights = vec![0.0; p];
    for (k, &a) in filter.samples().iter().enumerate() {
        weights[grid.bin(k)] += grid.trapezoid_weight(k) * a;
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(p);
    let inverse = planner.plan_fft_inverse(p);
    let m = geom.half_count() as i64;
    let inv_p = 1.0 / p as f64;

    let mut values = vec![0.0; n_out * geom.n_angles()];
    values
        .par_chunks_mut(n_out)
        .zip(sinogram.rows().collect::<Vec<_>>())
        .for_each(|(out, row)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); p];
            for (u, &g) in row.iter().enumerate() {
                buf[(u as i64 - m).rem_euclid(p as i64) as usize] = Complex64::new(g, 0.0);
            }
            forward.process(&mut buf);
            for (z, w) in buf.iter_mut().zip(&weights) {
                *z *= w;
            }
            inverse.process(&mut buf);
            for (idx, o) in out.iter_mut().enumerate() {
                let l = idx as i64 - m_ext as i64;
                *o = buf[l.rem_euclid(p as i64) as usize].re * inv_p;
            }
        });
    Ok(FilteredSinogram {
        geometry: *geom,
        half_count: m_ext,
        values,
    })
}

/// Second derivatives of the natural cubic spline through `y` on unit knots.
fn natural_spline_curvature(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior system M_{k-1} + 4 M_k + M_{k+1} = r_k
    let inner = n - 2;
    let mut c = vec![0.0; inner];
    let mut d = vec![0.0; inner];
    for k in 0..inner {
        let r = 6.0 * (y[k + 2] - 2.0 * y[k + 1] + y[k]);
        let prev_c = if k == 0 { 0.0 } else { c[k - 1] };
        let prev_d = if k == 0 { 0.0 } else { d[k - 1] };
        let denom = 4.0 - prev_c;
        c[k] = 1.0 / denom;
        d[k] = (r - prev_d) / denom;
    }
    for k in (0..inner).rev() {
        let next = if k + 1 < inner { m[k + 2] } else { 0.0 };
        m[k + 1] = d[k] - c[k] * next;
    }
    m
}

struct RowInterpolant<'a> {
    y: &'a [f64],
    curvature: Option<Vec<f64>>,
}

impl<'a> RowInterpolant<'a> {
    fn new(y: &'a [f64], interpolation: Interpolation) -> Self {
        let curvature = match interpolation {
            Interpolation::Linear => None,
            Interpolation::CubicSpline => Some(natural_spline_curvature(y)),
        };
        Self { y, curvature }
    }

    /// Value at fractional sample position `u`; zero outside `[0, n-1]`.
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        let last = (self.y.len() - 1) as f64;
        if !(0.0..=last).contains(&u) {
            return 0.0;
        }
        let k = (u.floor() as usize).min(self.y.len() - 2);
        let t = u - k as f64;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        match &self.curvature {
            None => y0 + t * (y1 - y0),
            Some(m) => {
                let f = 1.0 - t;
                f * y0 + t * y1 + ((f * f * f - f) * m[k] + (t * t * t - t) * m[k + 1]) / 6.0
            }
        }
    }
}

/// `½·(1/N_φ)·Σ_j I[row_j](x cos φ_j + y sin φ_j)` on an `n × n` pixel grid
/// over `[-R, R]²`.
pub fn back_project(
    filtered: &FilteredSinogram,
    n_pixels: usize,
    interpolation: Interpolation,
) -> Result<Image> {
    if n_pixels < 2 {
        return Err(CtError::Parameter(format!(
            "need at least 2 pixels per side, got {n_pixels}"
        )));
    }
    let geom = filtered.geometry();
    let radius = geom.radius();
    let n_angles = geom.n_angles();
    let inv_h = 1.0 / geom.step();
    let offset = filtered.half_count() as f64;

    let interpolants: Vec<RowInterpolant> = (0..n_angles)
        .map(|j| RowInterpolant::new(filtered.row(j), interpolation))
        .collect();
    let trig: Vec<(f64, f64)> = (0..n_angles)
        .map(|j| {
            let (s, c) = geom.angle(j).sin_cos();
            (c * inv_h, s * inv_h)
        })
        .collect();
    let xs: Vec<f64> = (0..n_pixels)
        .map(|q| pixel_coordinate(radius, n_pixels, q))
        .collect();

    let scale = 0.5 / n_angles as f64;
    let mut img = Image::zeros(n_pixels, radius);
    img.values_mut()
        .par_chunks_mut(n_pixels)
        .enumerate()
        .for_each(|(p, row)| {
            let y = pixel_coordinate(radius, n_pixels, p);
            for (interp, &(c, s)) in interpolants.iter().zip(&trig) {
                let base = y * s + offset;
                for (acc, &x) in row.iter_mut().zip(&xs) {
                    *acc += interp.eval(x * c + base);
                }
            }
            row.iter_mut().for_each(|v| *v *= scale);
        });
    Ok(img)
}

/// Full pipeline: row filtering on the filter's grid, then back projection.
pub fn reconstruct(
    sinogram: &Sinogram,
    filter: &FilterSpec,
    n_pixels: usize,
    interpolation: Interpolation,
) -> Result<Image> {
    let filtered = filter_rows(sinogram, filter, filter.grid())?;
    back_project(&filtered, n_pixels, interpolation)
}
