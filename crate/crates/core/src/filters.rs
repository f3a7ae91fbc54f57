//! Low-pass filters `A_L(σ) = |σ|·W(σ/L)` sampled on a [`FrequencyGrid`].
//!
//! Besides the classical windows this module builds the noise-optimized
//! filter for discrete data,
//!
//! ```text
//!            |σ| · P(σ)
//! A(σ) = ------------------------ ,   P(σ) = (1/N_φ) Σ_j |F_D g(σ, j)|²,   |σ| ≤ L
//!         P(σ) + h²·ε²·(2M+1)
//! ```
//!
//! and zero outside `[-L, L]`. `g` is the noiseless Radon data (reference
//! variant), the measurements, or Wiener-denoised measurements.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{CtError, Result};
use crate::geometry::{dft_radial_grid, FrequencyGrid, Sinogram, REL_SLACK};
use crate::noise::expected_discrete_noise_power;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    RamLak,
    SheppLogan,
    Cosine,
    Hamming { beta: f64 },
}

impl Window {
    pub fn hamming(beta: f64) -> Result<Self> {
        let w = Window::Hamming { beta };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if let Window::Hamming { beta } = *self {
            if !(0.5..=1.0).contains(&beta) {
                return Err(CtError::Parameter(format!(
                    "Hamming β must lie in [1/2, 1], got {beta}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::RamLak => write!(f, "ram_lak"),
            Window::SheppLogan => write!(f, "shepp_logan"),
            Window::Cosine => write!(f, "cosine"),
            Window::Hamming { beta } => write!(f, "hamming_{beta}"),
        }
    }
}

/// `W(σ)` of a classical window; zero for `|σ| > 1`.
pub fn classical_window(window: &Window, sigma: f64) -> Result<f64> {
    window.validate()?;
    Ok(window_value(window, sigma))
}

fn window_value(window: &Window, sigma: f64) -> f64 {
    if sigma.abs() > 1.0 {
        return 0.0;
    }
    match *window {
        Window::RamLak => 1.0,
        Window::SheppLogan => {
            let x = PI * sigma / 2.0;
            if x == 0.0 {
                1.0
            } else {
                x.sin() / x
            }
        }
        Window::Cosine => (PI * sigma / 2.0).cos(),
        Window::Hamming { beta } => beta + (1.0 - beta) * (PI * sigma).cos(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Classical(Window),
    OptimizedReference,
    OptimizedMeasured,
    OptimizedDenoised { kernel: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    bandwidth: f64,
    grid: FrequencyGrid,
    samples: Vec<f64>,
    provenance: Provenance,
}

impl FilterSpec {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// `A_L(σ_k)` for every grid frequency.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `sigma,value` CSV, one row per grid frequency.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,value\n");
        for (s, v) in self.grid.frequencies().iter().zip(&self.samples) {
            out.push_str(&format!("{s:.16e},{v:.16e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| CtError::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| CtError::io(path, e))
    }
}

fn in_band(sigma: f64, bandwidth: f64) -> bool {
    sigma.abs() <= bandwidth * (1.0 + REL_SLACK)
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(CtError::Parameter(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    Ok(())
}

/// `A_L(σ_k) = |σ_k|·W(σ_k/L)`.
pub fn filter_from_window(window: &Window, grid: &FrequencyGrid, bandwidth: f64) -> Result<FilterSpec> {
    window.validate()?;
    check_bandwidth(bandwidth)?;
    let samples = grid
        .frequencies()
        .iter()
        .map(|&s| {
            if in_band(s, bandwidth) {
                // clamp so the band edge is evaluated at exactly |σ/L| = 1
                s.abs() * window_value(window, (s / bandwidth).clamp(-1.0, 1.0))
            } else {
                0.0
            }
        })
        .collect();
    Ok(FilterSpec {
        bandwidth,
        grid: grid.clone(),
        samples,
        provenance: Provenance::Classical(*window),
    })
}

/// Optimized filter from an angle-averaged spectral power and a noise power.
fn optimized_from_power(
    power: &[f64],
    grid: &FrequencyGrid,
    bandwidth: f64,
    noise_power: f64,
    provenance: Provenance,
) -> FilterSpec {
    let samples = grid
        .frequencies()
        .iter()
        .zip(power)
        .map(|(&s, &p)| {
            if !in_band(s, bandwidth) {
                0.0
            } else if noise_power == 0.0 {
                s.abs()
            } else {
                s.abs() * p / (p + noise_power)
            }
        })
        .collect();
    FilterSpec {
        bandwidth,
        grid: grid.clone(),
        samples,
        provenance,
    }
}

fn optimized_from_data(
    data: &Sinogram,
    grid: &FrequencyGrid,
    level: f64,
    provenance: Provenance,
) -> Result<FilterSpec> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(CtError::Parameter(format!(
            "noise level must be ≥ 0, got {level}"
        )));
    }
    let geometry = data.geometry();
    let raw = dft_radial_grid(data, grid)?.mean_power();
    // real data has an even power spectrum; symmetrize away the rounding
    let power: Vec<f64> = (0..raw.len())
        .map(|k| 0.5 * (raw[k] + raw[grid.mirror(k)]))
        .collect();
    let noise_power = expected_discrete_noise_power(geometry, level, 1.0);
    Ok(optimized_from_power(
        &power,
        grid,
        geometry.bandwidth(),
        noise_power,
        provenance,
    ))
}

/// Optimized filter built from the noiseless Radon samples.
pub fn optimized_filter_reference(
    reference: &Sinogram,
    grid: &FrequencyGrid,
    level: f64,
) -> Result<FilterSpec> {
    optimized_from_data(reference, grid, level, Provenance::OptimizedReference)
}

/// Optimized filter with the measurements standing in for the Radon data.
pub fn optimized_filter_measured(
    measurements: &Sinogram,
    grid: &FrequencyGrid,
    level: f64,
) -> Result<FilterSpec> {
    optimized_from_data(measurements, grid, level, Provenance::OptimizedMeasured)
}

/// Optimized filter from Wiener-denoised measurements (`kernel × kernel`
/// window, noise variance `ε²`).
pub fn optimized_filter_denoised(
    measurements: &Sinogram,
    grid: &FrequencyGrid,
    level: f64,
    kernel: usize,
) -> Result<FilterSpec> {
    let denoised = wiener_denoise(measurements, kernel, Some(level * level))?;
    optimized_from_data(
        &denoised,
        grid,
        level,
        Provenance::OptimizedDenoised { kernel },
    )
}

/// Floor of the Wiener gain denominator.
const WIENER_TINY: f64 = 1e-300;

fn reflect(idx: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = idx.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Local adaptive Wiener filter over a `kernel × kernel` (radial × angular)
/// neighborhood with half-sample symmetric reflection at the borders.
///
/// `noise_variance = None` estimates it as the mean local variance.
pub fn wiener_denoise(
    sinogram: &Sinogram,
    kernel: usize,
    noise_variance: Option<f64>,
) -> Result<Sinogram> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(CtError::Parameter(format!(
            "Wiener kernel must be odd and positive, got {kernel}"
        )));
    }
    if let Some(nv) = noise_variance {
        if !(nv >= 0.0 && nv.is_finite()) {
            return Err(CtError::Parameter(format!(
                "noise variance must be ≥ 0, got {nv}"
            )));
        }
        if nv == 0.0 {
            return Ok(sinogram.clone());
        }
    }
    let geom = sinogram.geometry();
    let nr = geom.n_radial();
    let na = geom.n_angles();
    let half = (kernel / 2) as i64;
    let count = (kernel * kernel) as f64;
    let vals = sinogram.values();

    let mut means = vec![0.0; nr * na];
    let mut vars = vec![0.0; nr * na];
    for j in 0..na {
        for u in 0..nr {
            let mut sum = 0.0;
            for dj in -half..=half {
                let jj = reflect(j as i64 + dj, na);
                for du in -half..=half {
                    sum += vals[jj * nr + reflect(u as i64 + du, nr)];
                }
            }
            let mu = sum / count;
            let mut ss = 0.0;
            for dj in -half..=half {
                let jj = reflect(j as i64 + dj, na);
                for du in -half..=half {
                    let d = vals[jj * nr + reflect(u as i64 + du, nr)] - mu;
                    ss += d * d;
                }
            }
            means[j * nr + u] = mu;
            vars[j * nr + u] = ss / count;
        }
    }
    let nv = noise_variance.unwrap_or_else(|| vars.iter().sum::<f64>() / vars.len() as f64);
    let out = vals
        .iter()
        .zip(means.iter().zip(&vars))
        .map(|(&x, (&mu, &v))| {
            let gain = (v - nv).max(0.0) / v.max(nv).max(WIENER_TINY);
            mu + gain * (x - mu)
        })
        .collect();
    Sinogram::from_values(*geom, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dft_radial, ParallelGeometry};
    use crate::noise::{add_white_noise, NoiseSpec};
    use crate::phantoms::{radon_sample, shepp_logan};

    fn setup(n: usize) -> (ParallelGeometry, FrequencyGrid) {
        let g = ParallelGeometry::from_angles(n, 1.0).unwrap();
        let grid = FrequencyGrid::for_geometry(&g);
        (g, grid)
    }

    #[test]
    fn window_table() {
        assert_eq!(classical_window(&Window::RamLak, 0.3).unwrap(), 1.0);
        assert!((classical_window(&Window::SheppLogan, 1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        let h = Window::hamming(0.55).unwrap();
        assert!((classical_window(&h, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(classical_window(&Window::Cosine, 1.5).unwrap(), 0.0);
        assert!(Window::hamming(0.4).is_err());
        assert!(classical_window(&Window::Hamming { beta: 1.2 }, 0.0).is_err());
    }

    #[test]
    fn windows_are_even_and_bounded() {
        for w in [Window::RamLak, Window::SheppLogan, Window::Cosine, Window::Hamming { beta: 0.5 }] {
            for k in 0..=200 {
                let s = -1.2 + 2.4 * k as f64 / 200.0;
                let v = classical_window(&w, s).unwrap();
                assert_eq!(v, classical_window(&w, -s).unwrap());
                assert!(v.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn windowed_filter_samples() {
        let (g, grid) = setup(90);
        let l = g.bandwidth();
        let rl = filter_from_window(&Window::RamLak, &grid, l).unwrap();
        let cos = filter_from_window(&Window::Cosine, &grid, l).unwrap();
        let z = grid.zero_index();
        assert_eq!(rl.samples()[z], 0.0);
        assert_eq!(cos.samples()[z], 0.0);
        // grid index P/4 sits at σ = L/2 for the coupled geometry
        let k = z + grid.pad_length() / 4;
        assert!((grid.frequencies()[k] - l / 2.0).abs() < 1e-9);
        assert!((rl.samples()[k] - l / 2.0).abs() < 1e-9);
        assert!(cos.samples()[grid.len() - 1].abs() < 1e-12);
        // half bandwidth: everything above L/2 vanishes
        let narrow = filter_from_window(&Window::RamLak, &grid, l / 2.0).unwrap();
        assert_eq!(narrow.samples()[k + 1], 0.0);
    }

    #[test]
    fn zero_noise_is_ram_lak() {
        let (g, grid) = setup(60);
        let s = radon_sample(&shepp_logan(), &g).unwrap();
        let rl = filter_from_window(&Window::RamLak, &grid, g.bandwidth()).unwrap();
        for f in [
            optimized_filter_reference(&s, &grid, 0.0).unwrap(),
            optimized_filter_measured(&s, &grid, 0.0).unwrap(),
            optimized_filter_denoised(&s, &grid, 0.0, 5).unwrap(),
        ] {
            assert_eq!(f.samples(), rl.samples());
        }
    }

    #[test]
    fn zero_reference_kills_filter() {
        let (g, grid) = setup(60);
        let f = optimized_filter_reference(&Sinogram::zeros(g), &grid, 0.1).unwrap();
        assert!(f.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn huge_noise_suppresses_filter() {
        let (g, grid) = setup(60);
        let s = radon_sample(&shepp_logan(), &g).unwrap();
        let scale = s.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f = optimized_filter_reference(&s, &grid, 1e6 * scale).unwrap();
        let max = f.samples().iter().cloned().fold(0.0, f64::max);
        assert!(max <= 1e-6 * g.bandwidth(), "{max}");
    }

    #[test]
    fn reference_matches_direct_summation() {
        let (g, grid) = setup(40);
        let s = Sinogram::from_fn(g, |i, j| ((i * 7 + j as i64 * 13) % 11) as f64 / 11.0 - 0.4);
        let eps = 0.05;
        let f = optimized_filter_reference(&s, &grid, eps).unwrap();
        let noise = g.step().powi(2) * eps * eps * g.n_radial() as f64;
        for (k, &sigma) in grid.frequencies().iter().enumerate() {
            let p: f64 = (0..g.n_angles())
                .map(|j| dft_radial(&s, sigma, j).unwrap().norm_sqr())
                .sum::<f64>()
                / g.n_angles() as f64;
            let direct = sigma.abs() * p / (p + noise);
            let got = f.samples()[k];
            assert!((got - direct).abs() <= 1e-10 * direct.abs().max(1e-300), "k={k}");
        }
    }

    #[test]
    fn measured_equals_reference_for_noiseless_data() {
        let (g, grid) = setup(60);
        let s = radon_sample(&shepp_logan(), &g).unwrap();
        let a = optimized_filter_reference(&s, &grid, 0.02).unwrap();
        let b = optimized_filter_measured(&s, &grid, 0.02).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn measured_filter_is_even() {
        let (g, grid) = setup(60);
        let s = radon_sample(&shepp_logan(), &g).unwrap();
        let noisy = add_white_noise(&s, &NoiseSpec::with_level(0.05, 3)).unwrap();
        let f = optimized_filter_measured(&noisy, &grid, 0.05).unwrap();
        for k in 0..grid.len() {
            assert!((f.samples()[k] - f.samples()[grid.mirror(k)]).abs() <= 1e-12 * f.samples()[k].abs());
        }
    }

    #[test]
    fn wiener_trivial_cases() {
        let (g, _) = setup(40);
        let c = Sinogram::from_fn(g, |_, _| 1.25);
        let out = wiener_denoise(&c, 5, Some(0.01)).unwrap();
        for v in out.values() {
            assert!((v - 1.25).abs() < 1e-14);
        }
        let s = Sinogram::from_fn(g, |i, j| (i as f64 * 0.3).sin() * j as f64);
        assert_eq!(wiener_denoise(&s, 5, Some(0.0)).unwrap(), s);
        assert!(wiener_denoise(&s, 4, Some(0.1)).is_err());
        assert!(wiener_denoise(&s, 0, None).is_err());
        assert!(wiener_denoise(&s, 3, None).is_ok());
    }

    #[test]
    fn wiener_reduces_pure_noise_variance() {
        let g = ParallelGeometry::new(100, 50, 0.02, 1.0, PI / 0.02).unwrap();
        let noise = add_white_noise(&Sinogram::zeros(g), &NoiseSpec::with_level(1.0, 77)).unwrap();
        assert!(noise.values().len() >= 10_000);
        let out = wiener_denoise(&noise, 5, Some(1.0)).unwrap();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let (vin, vout) = (var(noise.values()), var(out.values()));
        assert!(vout < vin, "{vout} ≥ {vin}");
    }

    #[test]
    fn denoised_equals_reference_on_constant_data() {
        let (g, grid) = setup(60);
        let c = Sinogram::from_fn(g, |_, _| 0.7);
        let a = optimized_filter_reference(&c, &grid, 0.05).unwrap();
        let b = optimized_filter_denoised(&c, &grid, 0.05, 5).unwrap();
        let norm = a.samples().iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6 * norm);
    }

    #[test]
    fn csv_dump_format() {
        let (g, grid) = setup(12);
        let f = filter_from_window(&Window::RamLak, &grid, g.bandwidth()).unwrap();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("sigma,value"));
        assert_eq!(csv.lines().count(), grid.len() + 1);
        for line in lines {
            let mut parts = line.split(',');
            let s: f64 = parts.next().unwrap().parse().unwrap();
            let v: f64 = parts.next().unwrap().parse().unwrap();
            assert!(s.is_finite() && v.is_finite());
        }
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn reflection_indices() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(2, 5), 2);
        assert_eq!(reflect(-3, 1), 0);
    }
}
