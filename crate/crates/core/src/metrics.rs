use crate::error::{CtError, Result};
use crate::image::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub ssim: f64,
    pub n_pixels: usize,
    pub masked: bool,
}

/// Where the SSIM dynamic range `D` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DynamicRange {
    /// `max - min` of the reference (second) image.
    #[default]
    Reference,
    /// `max - min` over both images; makes the index symmetric.
    Pooled,
}

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.n_pixels() != b.n_pixels() {
        return Err(CtError::Dimension(format!(
            "images have {}² and {}² pixels",
            a.n_pixels(),
            b.n_pixels()
        )));
    }
    Ok(())
}

/// Mean squared error, optionally restricted to pixels centered in `B_R(0)`.
pub fn mse(a: &Image, b: &Image, mask_to_support: bool) -> Result<f64> {
    check_dims(a, b)?;
    let n = a.n_pixels();
    let r2 = b.radius() * b.radius();
    let mut sum = 0.0;
    let mut count = 0usize;
    for p in 0..n {
        for q in 0..n {
            if mask_to_support {
                let (x, y) = b.center(p, q);
                if x * x + y * y > r2 {
                    continue;
                }
            }
            let d = a.get(p, q) - b.get(p, q);
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(CtError::Dimension("no pixels inside the support mask".into()));
    }
    Ok(sum / count as f64)
}

/// Normalized 11-tap Gaussian (σ = 1.5), applied separably.
fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (k, v) in w.iter_mut().enumerate() {
        let d = k as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Valid-mode separable Gaussian filtering: output is `(n-10)²`.
fn blur_valid(src: &[f64], n: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let m = n - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; n * m];
    for r in 0..n {
        for c in 0..m {
            horiz[r * m + c] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * src[r * n + c + k])
                .sum();
        }
    }
    let mut out = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            out[r * m + c] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * horiz[(r + k) * m + c])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all fully contained 11×11 Gaussian windows, with `D`
/// taken from the reference `b`.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    ssim_with(a, b, DynamicRange::Reference)
}

pub fn ssim_with(a: &Image, b: &Image, range: DynamicRange) -> Result<f64> {
    check_dims(a, b)?;
    let n = a.n_pixels();
    if n < SSIM_WINDOW {
        return Err(CtError::Dimension(format!(
            "SSIM needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {n}×{n}"
        )));
    }
    let (blo, bhi) = b.min_max();
    let d = match range {
        DynamicRange::Reference => bhi - blo,
        DynamicRange::Pooled => {
            let (alo, ahi) = a.min_max();
            ahi.max(bhi) - alo.min(blo)
        }
    };
    // constant reference: fall back to unit range so the constants stay positive
    let d = if d > 0.0 { d } else { 1.0 };
    let c1 = (K1 * d).powi(2);
    let c2 = (K2 * d).powi(2);

    let taps = gaussian_taps();
    let av = a.values();
    let bv = b.values();
    let mu_a = blur_valid(av, n, &taps);
    let mu_b = blur_valid(bv, n, &taps);
    let prod = |f: &dyn Fn(usize) -> f64| (0..n * n).map(f).collect::<Vec<f64>>();
    let e_aa = blur_valid(&prod(&|k| av[k] * av[k]), n, &taps);
    let e_bb = blur_valid(&prod(&|k| bv[k] * bv[k]), n, &taps);
    let e_ab = blur_valid(&prod(&|k| av[k] * bv[k]), n, &taps);

    let total: f64 = (0..mu_a.len())
        .map(|k| {
            let (ma, mb) = (mu_a[k], mu_b[k]);
            let va = e_aa[k] - ma * ma;
            let vb = e_bb[k] - mb * mb;
            let cov = e_ab[k] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

pub fn report(reconstruction: &Image, truth: &Image, mask_to_support: bool) -> Result<MetricReport> {
    Ok(MetricReport {
        mse: mse(reconstruction, truth, mask_to_support)?,
        ssim: ssim(reconstruction, truth)?,
        n_pixels: truth.n_pixels(),
        masked: mask_to_support,
    })
}
