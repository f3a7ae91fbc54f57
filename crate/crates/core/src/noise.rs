//! Measurement noise models.
//!
//! Discrete white noise `ξ_{i,j} ~ N(0, ε²)` is what the reconstruction
//! experiments inject. The approximate-white-noise field with separable
//! covariance `δ_a(s, φ) = δ_a(s)·δ_a(φ)` is provided for checking the
//! moment formulas behind the optimized filters.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{CtError, Result};
use crate::geometry::{ParallelGeometry, Sinogram};
use crate::phantoms::sinogram_mean;
use crate::rng::{hash_words, CounterRng};

/// Lattices up to this many points are sampled by Cholesky factorization.
pub const CHOLESKY_MAX_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation `ε`.
    pub level: f64,
    /// Relative level `p_noise`; `level = p_noise · m_{Rf}` when built from data.
    pub p_noise: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn from_sinogram(p_noise: f64, sinogram: &Sinogram, seed: u64) -> Self {
        Self {
            level: noise_level(p_noise, sinogram),
            p_noise,
            seed,
        }
    }

    pub fn with_level(level: f64, seed: u64) -> Self {
        Self {
            level,
            p_noise: f64::NAN,
            seed,
        }
    }
}

/// `ε = p_noise · m_{Rf}`.
pub fn noise_level(p_noise: f64, sinogram: &Sinogram) -> f64 {
    p_noise * sinogram_mean(sinogram)
}

/// Seed for one realization of one sweep point, `base ⊕ hash(N_φ, p, r)`.
pub fn derive_seed(base: u64, n_angles: usize, p_noise: f64, realization: u64) -> u64 {
    base ^ hash_words(&[n_angles as u64, p_noise.to_bits(), realization])
}

/// The noise field `ξ_{i,j} = ε·z(seed, j, i+M)` alone.
pub fn white_noise(geometry: &ParallelGeometry, level: f64, seed: u64) -> Sinogram {
    let rng = CounterRng::new(seed);
    let nr = geometry.n_radial();
    let mut out = Sinogram::zeros(*geometry);
    out.values_mut()
        .par_chunks_mut(nr)
        .enumerate()
        .for_each(|(j, row)| {
            rng.fill_normal(j as u64, 0, row);
            row.iter_mut().for_each(|v| *v *= level);
        });
    out
}

/// Adds iid `N(0, ε²)` noise keyed by `(seed, i, j)`.
pub fn add_white_noise(sinogram: &Sinogram, spec: &NoiseSpec) -> Result<Sinogram> {
    if !(spec.level >= 0.0 && spec.level.is_finite()) {
        return Err(CtError::Parameter(format!(
            "noise level must be ≥ 0, got {}",
            spec.level
        )));
    }
    if spec.level == 0.0 {
        return Ok(sinogram.clone());
    }
    let noise = white_noise(sinogram.geometry(), spec.level, spec.seed);
    let mut out = sinogram.clone();
    for (v, n) in out.values_mut().iter_mut().zip(noise.values()) {
        *v += n;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKernel {
    /// `δ_a(t) = (a/2)·e^{-a|t|}`.
    OrnsteinUhlenbeck,
    /// `δ_a(t) = a` for `|t| ≤ 1/(2a)`, else 0.
    Box,
}

/// Covariance of approximate white noise on `[-R, R] × [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUCovariance {
    pub rate: f64,
    pub support_radius: f64,
    pub kernel: CovarianceKernel,
}

impl OUCovariance {
    pub fn new(rate: f64, support_radius: f64) -> Result<Self> {
        Self::with_kernel(rate, support_radius, CovarianceKernel::OrnsteinUhlenbeck)
    }

    pub fn boxcar(rate: f64, support_radius: f64) -> Result<Self> {
        Self::with_kernel(rate, support_radius, CovarianceKernel::Box)
    }

    pub fn with_kernel(rate: f64, support_radius: f64, kernel: CovarianceKernel) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(CtError::Parameter(format!("rate a must be > 0, got {rate}")));
        }
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(CtError::Parameter(format!(
                "support radius must be > 0, got {support_radius}"
            )));
        }
        Ok(Self {
            rate,
            support_radius,
            kernel,
        })
    }

    /// One-dimensional kernel; even, non-negative, unit integral.
    pub fn delta(&self, t: f64) -> f64 {
        let a = self.rate;
        match self.kernel {
            CovarianceKernel::OrnsteinUhlenbeck => 0.5 * a * (-a * t.abs()).exp(),
            CovarianceKernel::Box => {
                if t.abs() <= 0.5 / a {
                    a
                } else {
                    0.0
                }
            }
        }
    }

    /// Separable extension `δ_a(t, φ) = δ_a(t)·δ_a(φ)`.
    pub fn delta2(&self, t: f64, phi: f64) -> f64 {
        self.delta(t) * self.delta(phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SamplingMode {
    Cholesky,
    Recursion,
}

/// One realization of the zero-mean Gaussian field with covariance
/// `δ_a(s_i - s_k)·δ_a(φ_j - φ_l)` on the lattice.
///
/// The covariance matrix is the Kronecker product of the radial and angular
/// factors, so its Cholesky factor is the Kronecker product of theirs. Small
/// lattices use that factor directly; larger Ornstein–Uhlenbeck lattices use
/// the equivalent AR(1) recursion along each axis.
pub fn sample_ou_field(
    geometry: &ParallelGeometry,
    cov: &OUCovariance,
    seed: u64,
) -> Result<Sinogram> {
    let points = geometry.n_radial() * geometry.n_angles();
    let mode = if points <= CHOLESKY_MAX_POINTS || cov.kernel == CovarianceKernel::Box {
        SamplingMode::Cholesky
    } else {
        SamplingMode::Recursion
    };
    sample_ou_field_with(geometry, cov, seed, mode)
}

pub(crate) fn sample_ou_field_with(
    geometry: &ParallelGeometry,
    cov: &OUCovariance,
    seed: u64,
    mode: SamplingMode,
) -> Result<Sinogram> {
    let nr = geometry.n_radial();
    let na = geometry.n_angles();
    let white = white_noise(geometry, 1.0, seed);
    // z[u][j]: radial index u, angle j
    let z = DMatrix::from_fn(nr, na, |u, j| white.values()[j * nr + u]);

    let x = match mode {
        SamplingMode::Cholesky => {
            let ls = cholesky_factor(nr, geometry.step(), cov)?;
            let lp = cholesky_factor(na, std::f64::consts::PI / na as f64, cov)?;
            &ls * z * lp.transpose()
        }
        SamplingMode::Recursion => {
            if cov.kernel != CovarianceKernel::OrnsteinUhlenbeck {
                return Err(CtError::Parameter(
                    "the autoregressive recursion only applies to the Ornstein-Uhlenbeck kernel"
                        .into(),
                ));
            }
            let a = cov.rate;
            let rho_s = (-a * geometry.step()).exp();
            let rho_p = (-a * std::f64::consts::PI / na as f64).exp();
            let mut y = z;
            ar1_columns(&mut y, rho_s);
            let mut yt = y.transpose();
            ar1_columns(&mut yt, rho_p);
            yt.transpose() * cov.delta(0.0)
        }
    };
    let mut values = vec![0.0; nr * na];
    for j in 0..na {
        for u in 0..nr {
            values[j * nr + u] = x[(u, j)];
        }
    }
    Sinogram::from_values(*geometry, values)
}

/// Lower Cholesky factor of `[δ_a((k - l)·spacing)]_{k,l}`.
fn cholesky_factor(n: usize, spacing: f64, cov: &OUCovariance) -> Result<DMatrix<f64>> {
    let c = DMatrix::from_fn(n, n, |k, l| cov.delta((k as f64 - l as f64) * spacing));
    if let Some(ch) = c.clone().cholesky() {
        return Ok(ch.l());
    }
    let jitter = 1e-10 * cov.delta(0.0);
    let regularized = c + DMatrix::identity(n, n) * jitter;
    regularized.cholesky().map(|ch| ch.l()).ok_or_else(|| {
        CtError::Factorization(format!(
            "{n}×{n} covariance with spacing {spacing} and a = {} is not positive definite",
            cov.rate
        ))
    })
}

/// Unit-variance AR(1) filter down each column: `y_0 = z_0`,
/// `y_k = ρ·y_{k-1} + √(1-ρ²)·z_k`.
fn ar1_columns(m: &mut DMatrix<f64>, rho: f64) {
    let gain = (1.0 - rho * rho).sqrt();
    for mut col in m.column_iter_mut() {
        for k in 1..col.len() {
            col[k] = rho * col[k - 1] + gain * col[k];
        }
    }
}

/// `E|F h_a(σ, 0, ·)|² = ∫∫_{[-R,R]²} δ_a(s-ŝ, 0)·e^{-i(s-ŝ)σ} ds dŝ` in
/// closed form.
///
/// For the Ornstein–Uhlenbeck kernel, with `δ_a(t, 0) = (a²/4)e^{-a|t|}`:
///
/// ```text
/// a² · ( aR/(a²+σ²)
///        + [½(e^{-2aR}cos 2Rσ - 1)(a²-σ²) - aσ e^{-2aR} sin 2Rσ] / (a²+σ²)² )
/// ```
pub fn ou_spectrum_expectation(sigma: f64, cov: &OUCovariance) -> f64 {
    let a = cov.rate;
    let r = cov.support_radius;
    let sigma = sigma.abs();
    match cov.kernel {
        CovarianceKernel::OrnsteinUhlenbeck => {
            let q = a * a + sigma * sigma;
            let decay = (-2.0 * a * r).exp();
            let (sin2, cos2) = (2.0 * r * sigma).sin_cos();
            let tail = 0.5 * (decay * cos2 - 1.0) * (a * a - sigma * sigma) - a * sigma * decay * sin2;
            a * a * (a * r / q + tail / (q * q))
        }
        CovarianceKernel::Box => {
            // a² · 2∫_0^c (2R - u) cos(σu) du with c = min(1/(2a), 2R)
            let c = (0.5 / a).min(2.0 * r);
            let t = 2.0 * r;
            let integral = if sigma * c < 1e-4 {
                let s2 = sigma * sigma;
                // series through σ²
                t * c - 0.5 * c * c - s2 * (t * c.powi(3) / 6.0 - c.powi(4) / 8.0)
            } else {
                let s = (sigma * c).sin();
                let half = (0.5 * sigma * c).sin();
                t * s / sigma - (c * s / sigma - 2.0 * half * half / (sigma * sigma))
            };
            a * a * 2.0 * integral
        }
    }
}

/// Expected discrete noise power `h²·ε²·(2M+1)·δ₀` of `F_D ξ` at any frequency.
pub fn expected_discrete_noise_power(geometry: &ParallelGeometry, level: f64, delta0: f64) -> f64 {
    let h = geometry.step();
    h * h * level * level * geometry.n_radial() as f64 * delta0
}
