//! Filtered back projection for parallel-beam CT with noise-aware optimized
//! filters.
//!
//! The pipeline is: a [`Phantom`] is sampled into a [`Sinogram`] on a
//! [`ParallelGeometry`], white noise is added, a [`FilterSpec`] is designed on
//! a [`FrequencyGrid`], and [`reconstruct`] filters each angle and back
//! projects onto an [`Image`].

pub mod error;
pub mod fbp;
pub mod filters;
pub mod geometry;
pub mod harness;
pub mod image;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantoms;
pub mod rng;

pub use error::{CtError, Result};
pub use fbp::{back_project, filter_rows, reconstruct, FilteredSinogram, Interpolation};
pub use filters::{
    classical_window, filter_from_window, optimized_filter_denoised, optimized_filter_measured,
    optimized_filter_reference, wiener_denoise, FilterSpec, Provenance, Window,
};
pub use geometry::{dft_radial, dft_radial_grid, FrequencyGrid, ParallelGeometry, RadialSpectrum, Sinogram};
pub use image::Image;
pub use metrics::{mse, ssim, MetricReport};
pub use noise::{add_white_noise, NoiseSpec, OUCovariance};
pub use phantoms::{radon_analytic, radon_sample, rasterize, shepp_logan, Phantom, Shape};
