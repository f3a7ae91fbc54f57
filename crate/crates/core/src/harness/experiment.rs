use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{CtError, Result};
use crate::fbp::reconstruct;
use crate::filters::{
    filter_from_window, optimized_filter_denoised, optimized_filter_measured,
    optimized_filter_reference, FilterSpec, Window,
};
use crate::geometry::{FrequencyGrid, ParallelGeometry, Sinogram};
use crate::harness::config::{
    ExperimentConfig, FilterId, Param, PhantomChoice, HAMMING_BETA_GRID, TUNING_REALIZATIONS,
    WIENER_KERNEL_GRID,
};
use crate::harness::csv::{write_results, ResultRow};
use crate::image::Image;
use crate::metrics::{mse, ssim};
use crate::noise::{add_white_noise, derive_seed, noise_level, NoiseSpec};
use crate::phantoms::{
    default_rectangles, modified_shepp_logan, radon_sample, rasterize, read_phantom, shepp_logan,
    Phantom,
};

/// Mixed into the base seed for the held-out tuning realizations.
const TUNING_SEED_TAG: u64 = 0x7475_6e69_6e67_5f73;

/// A filter with every hyperparameter fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedFilter {
    Classical(Window),
    Reference,
    Measured,
    Denoised { kernel: usize },
}

/// The data a filter may be built from. Measurement-driven filters only ever
/// look at `measurements`.
#[derive(Debug, Clone, Copy)]
pub struct FilterInputs<'a> {
    pub reference: &'a Sinogram,
    pub measurements: &'a Sinogram,
    /// `ε` as seen by the filter design (never includes misestimation).
    pub level: f64,
}

pub fn build_filter(
    filter: ResolvedFilter,
    grid: &FrequencyGrid,
    inputs: FilterInputs<'_>,
) -> Result<FilterSpec> {
    match filter {
        ResolvedFilter::Classical(w) => {
            filter_from_window(&w, grid, inputs.measurements.geometry().bandwidth())
        }
        ResolvedFilter::Reference => optimized_filter_reference(inputs.reference, grid, inputs.level),
        ResolvedFilter::Measured => optimized_filter_measured(inputs.measurements, grid, inputs.level),
        ResolvedFilter::Denoised { kernel } => {
            optimized_filter_denoised(inputs.measurements, grid, inputs.level, kernel)
        }
    }
}

/// Phantom for one angle count (the modified phantom is normalized per lattice).
pub fn load_phantom(cfg: &ExperimentConfig, geometry: &ParallelGeometry) -> Result<Phantom> {
    match &cfg.phantom {
        PhantomChoice::SheppLogan => Ok(shepp_logan()),
        PhantomChoice::Modified => modified_shepp_logan(&default_rectangles(), cfg.nu, geometry),
        PhantomChoice::File(path) => read_phantom(path),
    }
}

/// Everything shared by the realizations of one `(N_φ, p_noise)` point.
struct SweepPoint {
    grid: FrequencyGrid,
    clean: Sinogram,
    truth: Image,
    n_angles: usize,
    p_noise: f64,
    /// `ε = p·m`, handed to the filters.
    level: f64,
    /// Standard deviation actually injected.
    injected: f64,
}

impl SweepPoint {
    fn noisy(&self, seed: u64) -> Result<Sinogram> {
        add_white_noise(&self.clean, &NoiseSpec::with_level(self.injected, seed))
    }

    fn inputs<'a>(&'a self, noisy: &'a Sinogram) -> FilterInputs<'a> {
        FilterInputs {
            reference: &self.clean,
            measurements: noisy,
            level: self.level,
        }
    }

    fn mse_of(&self, cfg: &ExperimentConfig, filter: ResolvedFilter, noisy: &Sinogram) -> Result<f64> {
        let spec = build_filter(filter, &self.grid, self.inputs(noisy))?;
        let recon = reconstruct(noisy, &spec, cfg.recon_pixels, cfg.interpolation)?;
        mse(&recon, &self.truth, cfg.mask_metrics)
    }
}

/// Picks the candidate with the lowest mean MSE over the held-out realizations;
/// ties go to the earlier candidate.
fn tune(
    cfg: &ExperimentConfig,
    point: &SweepPoint,
    candidates: &[ResolvedFilter],
) -> Result<ResolvedFilter> {
    let held_out: Vec<Sinogram> = (0..TUNING_REALIZATIONS as u64)
        .map(|k| {
            let seed = derive_seed(cfg.seed ^ TUNING_SEED_TAG, point.n_angles, point.p_noise, k);
            point.noisy(seed)
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|&c| {
            let total = held_out
                .iter()
                .map(|noisy| point.mse_of(cfg, c, noisy))
                .sum::<Result<f64>>()?;
            Ok(total / held_out.len() as f64)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = k;
        }
    }
    Ok(candidates[best])
}

fn resolve(cfg: &ExperimentConfig, point: &SweepPoint, id: FilterId) -> Result<ResolvedFilter> {
    Ok(match id {
        FilterId::RamLak => ResolvedFilter::Classical(Window::RamLak),
        FilterId::SheppLogan => ResolvedFilter::Classical(Window::SheppLogan),
        FilterId::Cosine => ResolvedFilter::Classical(Window::Cosine),
        FilterId::Hamming(Param::Fixed(beta)) => ResolvedFilter::Classical(Window::hamming(beta)?),
        FilterId::Hamming(Param::Auto) => {
            let candidates: Vec<ResolvedFilter> = HAMMING_BETA_GRID
                .iter()
                .map(|&b| Window::hamming(b).map(ResolvedFilter::Classical))
                .collect::<Result<_>>()?;
            tune(cfg, point, &candidates)?
        }
        FilterId::OptReference => ResolvedFilter::Reference,
        FilterId::OptMeasured => ResolvedFilter::Measured,
        FilterId::OptDenoised(param) => match param.unwrap_or(cfg.wiener_kernel) {
            Param::Fixed(kernel) => ResolvedFilter::Denoised { kernel },
            Param::Auto => {
                let candidates: Vec<ResolvedFilter> = WIENER_KERNEL_GRID
                    .iter()
                    .map(|&kernel| ResolvedFilter::Denoised { kernel })
                    .collect();
                tune(cfg, point, &candidates)?
            }
        },
    })
}

fn build_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for &n_angles in &cfg.angle_list {
        let radius = match &cfg.phantom {
            PhantomChoice::File(path) => read_phantom(path)?.radius(),
            _ => 1.0,
        };
        let geometry = ParallelGeometry::from_angles(n_angles, radius)?;
        let phantom = load_phantom(cfg, &geometry)?;
        let clean = radon_sample(&phantom, &geometry)?;
        let truth = rasterize(&phantom, cfg.recon_pixels)?;
        let grid = FrequencyGrid::for_geometry(&geometry);
        for &p_noise in &cfg.p_noise_list {
            let level = noise_level(p_noise, &clean);
            points.push(SweepPoint {
                grid: grid.clone(),
                clean: clean.clone(),
                truth: truth.clone(),
                n_angles,
                p_noise,
                level,
                injected: level * cfg.noise_misestimation_factor,
            });
        }
    }
    Ok(points)
}

fn filter_dump_path(dir: &Path, n_angles: usize, p_noise: f64, label: &str) -> PathBuf {
    dir.join(format!("filter_n{n_angles}_p{p_noise}_{label}.csv"))
}

fn run_inner(cfg: &ExperimentConfig, dump_dir: Option<&Path>) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points = build_points(cfg)?;
    let mut rows = Vec::new();
    for point in &points {
        let resolved: Vec<(String, ResolvedFilter)> = cfg
            .filters
            .iter()
            .map(|&id| Ok((id.to_string(), resolve(cfg, point, id)?)))
            .collect::<Result<_>>()?;
        let chunk: Vec<Vec<ResultRow>> = (0..cfg.n_realizations as u64)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(cfg.seed, point.n_angles, point.p_noise, r);
                let noisy = point.noisy(seed)?;
                resolved
                    .iter()
                    .map(|(label, filter)| {
                        let start = Instant::now();
                        let spec = build_filter(*filter, &point.grid, point.inputs(&noisy))?;
                        let recon = reconstruct(&noisy, &spec, cfg.recon_pixels, cfg.interpolation)?;
                        let row_mse = mse(&recon, &point.truth, cfg.mask_metrics)?;
                        let row_ssim = ssim(&recon, &point.truth)?;
                        let elapsed = start.elapsed().as_secs_f64() * 1e3;
                        if let (0, Some(dir)) = (r, dump_dir) {
                            spec.write_csv(&filter_dump_path(dir, point.n_angles, point.p_noise, label))?;
                        }
                        Ok(ResultRow {
                            n_angles: point.n_angles,
                            p_noise: point.p_noise,
                            filter: label.clone(),
                            seed,
                            mse: row_mse,
                            ssim: row_ssim,
                            wall_time_ms: if cfg.record_timing { elapsed } else { 0.0 },
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk.into_iter().flatten());
    }
    Ok(rows)
}

/// Runs the full sweep in memory. Rows come out ordered by angle count, noise
/// level, realization, then filter, in config order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_inner(cfg, None)
}

/// Runs the sweep and writes `results.csv` (plus filter dumps when enabled)
/// into `output_dir`. Returns the CSV path.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CtError::io(dir, e))?;
    let rows = run_inner(cfg, cfg.filter_dumps.then_some(dir.as_path()))?;
    let path = dir.join("results.csv");
    write_results(&rows, &path)?;
    Ok(path)
}

/// Thread pool sized by `CT_THREADS` when set, otherwise rayon's default.
pub fn thread_pool_from_env() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CtError::config("CT_THREADS", format!("expected a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CtError::Parameter(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n_angles: usize,
    pub p_noise: f64,
    pub filter: String,
    pub mean_mse: f64,
    pub mean_ssim: f64,
    pub count: usize,
}

/// Means over realizations, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        let found = out.iter_mut().find(|s| {
            s.n_angles == row.n_angles && s.p_noise == row.p_noise && s.filter == row.filter
        });
        match found {
            Some(s) => {
                s.mean_mse += row.mse;
                s.mean_ssim += row.ssim;
                s.count += 1;
            }
            None => out.push(SummaryRow {
                n_angles: row.n_angles,
                p_noise: row.p_noise,
                filter: row.filter.clone(),
                mean_mse: row.mse,
                mean_ssim: row.ssim,
                count: 1,
            }),
        }
    }
    for s in &mut out {
        s.mean_mse /= s.count as f64;
        s.mean_ssim /= s.count as f64;
    }
    out
}
