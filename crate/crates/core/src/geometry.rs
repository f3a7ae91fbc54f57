//! Parallel-beam sampling lattice, sinograms, and the discrete radial
//! Fourier transform
//!
//! ```text
//! F_D g(σ, j) = h · Σ_{i=-M..M} g(i, j) · exp(-i · s_i · σ),   s_i = i·h
//! ```
//!
//! Fourier convention everywhere in the crate: `F f(σ) = ∫ f(s) e^{-isσ} ds`
//! and `F⁻¹A(s) = (1/2π) ∫ A(σ) e^{isσ} dσ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CtError, Result};

/// Relative slack used when checking `M·h ≥ R` and `|σ| ≤ L` in floating point.
pub(crate) const REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelGeometry {
    n_angles: usize,
    half_count: usize,
    step: f64,
    radius: f64,
    bandwidth: f64,
}

impl ParallelGeometry {
    /// Geometry with bandwidth and radial step coupled to the angle count:
    /// `M = ⌊N_φ/π⌋`, `L = πM/R`, `h = π/L`.
    pub fn from_angles(n_angles: usize, support_radius: f64) -> Result<Self> {
        if !(support_radius.is_finite() && support_radius > 0.0) {
            return Err(CtError::InvalidGeometry(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        let half_count = (n_angles as f64 / PI).floor() as usize;
        if half_count < 1 {
            return Err(CtError::InvalidGeometry(format!(
                "n_angles = {n_angles} gives M = 0; need at least 4 angles"
            )));
        }
        let bandwidth = PI * half_count as f64 / support_radius;
        let step = PI / bandwidth;
        Ok(Self {
            n_angles,
            half_count,
            step,
            radius: support_radius,
            bandwidth,
        })
    }

    /// Free-form geometry. Requires `M·h ≥ R`.
    pub fn new(
        n_angles: usize,
        half_count: usize,
        step: f64,
        radius: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        if n_angles == 0 || half_count == 0 {
            return Err(CtError::InvalidGeometry(format!(
                "need N_φ ≥ 1 and M ≥ 1, got N_φ = {n_angles}, M = {half_count}"
            )));
        }
        for (name, v) in [("h", step), ("R", radius), ("L", bandwidth)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CtError::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if (half_count as f64) * step < radius * (1.0 - REL_SLACK) {
            return Err(CtError::InvalidGeometry(format!(
                "radial samples do not cover the support: M·h = {} < R = {radius}",
                half_count as f64 * step
            )));
        }
        Ok(Self {
            n_angles,
            half_count,
            step,
            radius,
            bandwidth,
        })
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    /// `M`; radial indices run over `-M..=M`.
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn n_radial(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn offset(&self, i: i64) -> f64 {
        i as f64 * self.step
    }

    pub fn angle(&self, j: usize) -> f64 {
        j as f64 * PI / self.n_angles as f64
    }

    /// Half-width of the extended radial index set used after filtering,
    /// `⌈√2·M⌉ + 2`.
    pub fn extended_half_count(&self) -> usize {
        (std::f64::consts::SQRT_2 * self.half_count as f64).ceil() as usize + 2
    }

    pub(crate) fn check_angle(&self, j: usize) -> Result<()> {
        if j >= self.n_angles {
            return Err(CtError::Index {
                what: "angle index",
                index: j as i64,
                lo: 0,
                hi: self.n_angles as i64 - 1,
            });
        }
        Ok(())
    }
}

/// Line-integral samples `g(i, j)`, stored angle-major: row `j` holds
/// `i = -M..=M` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    geometry: ParallelGeometry,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(geometry: ParallelGeometry) -> Self {
        let n = geometry.n_radial() * geometry.n_angles();
        Self {
            geometry,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(geometry: ParallelGeometry, values: Vec<f64>) -> Result<Self> {
        let expected = geometry.n_radial() * geometry.n_angles();
        if values.len() != expected {
            return Err(CtError::Dimension(format!(
                "sinogram needs (2M+1)·N_φ = {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(CtError::Parameter(format!(
                "non-finite sinogram value at flat index {pos}"
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn from_fn(geometry: ParallelGeometry, f: impl Fn(i64, usize) -> f64 + Sync) -> Self {
        let m = geometry.half_count() as i64;
        let nr = geometry.n_radial();
        let mut values = vec![0.0; nr * geometry.n_angles()];
        values
            .par_chunks_mut(nr)
            .enumerate()
            .for_each(|(j, row)| {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = f(u as i64 - m, j);
                }
            });
        Self { geometry, values }
    }

    pub fn geometry(&self) -> &ParallelGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: i64, j: usize) -> f64 {
        let m = self.geometry.half_count() as i64;
        debug_assert!(i.abs() <= m && j < self.geometry.n_angles());
        self.values[j * self.geometry.n_radial() + (i + m) as usize]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nr = self.geometry.n_radial();
        &self.values[j * nr..(j + 1) * nr]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.geometry.n_radial())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            geometry: self.geometry,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Mean absolute value over the whole lattice.
    pub fn mean_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }
}

/// Equispaced frequencies `σ_k = k·Δσ`, `k = -P/2..=P/2`, `Δσ = 2π/(P·h)`.
///
/// The two end points `±P/2` alias to the same FFT bin; quadrature over the
/// grid uses half weights there (closed trapezoid rule over one period).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pad_length: usize,
    step: f64,
    frequencies: Vec<f64>,
}

impl FrequencyGrid {
    /// Grid shared by filter construction and row filtering: the smallest
    /// power of two that holds the extended filtered row twice over
    /// (`P ≥ 2(2M_ext+1)`, which also satisfies `P ≥ 2(2M+1)`).
    pub fn for_geometry(geometry: &ParallelGeometry) -> Self {
        let need = 2 * (2 * geometry.extended_half_count() + 1);
        Self::build(need.next_power_of_two(), geometry.step())
    }

    pub fn with_pad_length(geometry: &ParallelGeometry, pad_length: usize) -> Result<Self> {
        let min = 2 * geometry.n_radial();
        if !pad_length.is_power_of_two() || pad_length < min {
            return Err(CtError::Parameter(format!(
                "pad length must be a power of two ≥ {min}, got {pad_length}"
            )));
        }
        Ok(Self::build(pad_length, geometry.step()))
    }

    fn build(pad_length: usize, radial_step: f64) -> Self {
        let step = 2.0 * PI / (pad_length as f64 * radial_step);
        let half = pad_length as i64 / 2;
        let frequencies = (-half..=half).map(|k| k as f64 * step).collect();
        Self {
            pad_length,
            step,
            frequencies,
        }
    }

    pub fn pad_length(&self) -> usize {
        self.pad_length
    }

    /// `Δσ`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Grid index of `σ = 0`.
    pub fn zero_index(&self) -> usize {
        self.pad_length / 2
    }

    /// Largest grid frequency, `π/h`.
    pub fn max_frequency(&self) -> f64 {
        *self.frequencies.last().unwrap()
    }

    /// Index of the grid point mirrored through zero.
    pub fn mirror(&self, idx: usize) -> usize {
        self.frequencies.len() - 1 - idx
    }

    /// FFT bin (`0..P`) of grid index `idx`.
    pub(crate) fn bin(&self, idx: usize) -> usize {
        let k = idx as i64 - self.zero_index() as i64;
        k.rem_euclid(self.pad_length as i64) as usize
    }

    /// Trapezoid weight of grid index `idx` (1 inside, 1/2 at both ends).
    pub fn trapezoid_weight(&self, idx: usize) -> f64 {
        if idx == 0 || idx + 1 == self.frequencies.len() {
            0.5
        } else {
            1.0
        }
    }

    pub(crate) fn check_geometry(&self, geometry: &ParallelGeometry) -> Result<()> {
        let expected = 2.0 * PI / (self.pad_length as f64 * geometry.step());
        if (expected - self.step).abs() > REL_SLACK * expected {
            return Err(CtError::Dimension(format!(
                "frequency grid spacing {} does not match radial step h = {}",
                self.step,
                geometry.step()
            )));
        }
        if self.pad_length < geometry.n_radial() {
            return Err(CtError::Dimension(format!(
                "pad length {} shorter than 2M+1 = {}",
                self.pad_length,
                geometry.n_radial()
            )));
        }
        Ok(())
    }
}

/// `F_D` of one sinogram row at an arbitrary frequency, by direct summation.
pub fn dft_radial(sinogram: &Sinogram, frequency: f64, angle_index: usize) -> Result<Complex64> {
    let geom = sinogram.geometry();
    geom.check_angle(angle_index)?;
    Ok(dft_row(
        sinogram.row(angle_index),
        geom.half_count(),
        geom.step(),
        frequency,
    ))
}

pub(crate) fn dft_row(row: &[f64], half_count: usize, step: f64, frequency: f64) -> Complex64 {
    let m = half_count as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, &g) in row.iter().enumerate() {
        let phase = -((u as i64 - m) as f64 * step) * frequency;
        let (s, c) = phase.sin_cos();
        acc += Complex64::new(g * c, g * s);
    }
    acc * step
}

/// `F_D` on every grid frequency and angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpectrum {
    n_freqs: usize,
    n_angles: usize,
    data: Vec<Complex64>,
}

impl RadialSpectrum {
    /// Entry at grid index `k` (into `FrequencyGrid::frequencies`) and angle `j`.
    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        self.data[j * self.n_freqs + k]
    }

    pub fn n_freqs(&self) -> usize {
        self.n_freqs
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn angle(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n_freqs..(j + 1) * self.n_freqs]
    }

    /// `(1/N_φ) Σ_j |F_D g(σ_k, j)|²` for every grid index `k`.
    pub fn mean_power(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_freqs];
        for j in 0..self.n_angles {
            for (o, z) in out.iter_mut().zip(self.angle(j)) {
                *o += z.norm_sqr();
            }
        }
        let inv = 1.0 / self.n_angles as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }
}

/// `F_D` of every row on the grid, via one zero-padded FFT per angle.
pub fn dft_radial_grid(sinogram: &Sinogram, grid: &FrequencyGrid) -> Result<RadialSpectrum> {
    let geom = sinogram.geometry();
    grid.check_geometry(geom)?;
    let p = grid.pad_length();
    let m = geom.half_count() as i64;
    let h = geom.step();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(p);
    let n_freqs = grid.len();

    let data: Vec<Complex64> = sinogram
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|row| {
            let mut buf = vec![Complex64::new(0.0, 0.0); p];
            for (u, &g) in row.iter().enumerate() {
                let i = u as i64 - m;
                buf[i.rem_euclid(p as i64) as usize] = Complex64::new(g, 0.0);
            }
            fft.process(&mut buf);
            (0..n_freqs).map(move |k| buf[grid.bin(k)] * h)
        })
        .collect();

    Ok(RadialSpectrum {
        n_freqs,
        n_angles: geom.n_angles(),
        data,
    })
}
