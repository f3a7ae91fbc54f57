//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! phantom = shepp_logan            # shepp_logan | modified | <path to phantom file>
//! phantom.nu = 1.5
//! sweep.angles = 90,180,360
//! sweep.p_noise = 0.05,0.1,0.15
//! sweep.realizations = 10
//! sweep.filters = ram_lak,shepp_logan,cosine,hamming:auto,opt_reference,opt_measured,opt_denoised
//! recon.pixels = 256
//! recon.interpolation = linear
//! wiener.kernel = 5                # odd integer or auto
//! seed = 2024
//! noise.misestimation = 1.0
//! metrics.mask = false
//! output.dir = results
//! output.timing = false
//! output.filter_dumps = false
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CtError, Result};
use crate::fbp::Interpolation;

/// Hamming β grid searched by `hamming:auto`.
pub const HAMMING_BETA_GRID: [f64; 11] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0];
/// Wiener kernel sizes searched by `opt_denoised:auto`.
pub const WIENER_KERNEL_GRID: [usize; 4] = [3, 5, 7, 9];
/// Held-out realizations used to tune `auto` hyperparameters.
pub const TUNING_REALIZATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param<T> {
    Fixed(T),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterId {
    RamLak,
    SheppLogan,
    Cosine,
    Hamming(Param<f64>),
    /// Optimized filter from the noiseless sinogram.
    OptReference,
    /// Optimized filter from the noisy measurements.
    OptMeasured,
    /// Optimized filter from Wiener-denoised measurements; `None` uses
    /// `wiener.kernel`.
    OptDenoised(Option<Param<usize>>),
}

impl FilterId {
    /// `auto` hyperparameters resolved against the config-level default kernel.
    pub fn needs_tuning(&self, default_kernel: Param<usize>) -> bool {
        match self {
            FilterId::Hamming(Param::Auto) => true,
            FilterId::OptDenoised(Some(Param::Auto)) => true,
            FilterId::OptDenoised(None) => default_kernel == Param::Auto,
            _ => false,
        }
    }
}

impl fmt::Display for FilterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterId::RamLak => write!(f, "ram_lak"),
            FilterId::SheppLogan => write!(f, "shepp_logan"),
            FilterId::Cosine => write!(f, "cosine"),
            FilterId::Hamming(Param::Fixed(b)) => write!(f, "hamming_{b}"),
            FilterId::Hamming(Param::Auto) => write!(f, "hamming_auto"),
            FilterId::OptReference => write!(f, "opt_reference"),
            FilterId::OptMeasured => write!(f, "opt_measured"),
            FilterId::OptDenoised(None) => write!(f, "opt_denoised"),
            FilterId::OptDenoised(Some(Param::Fixed(k))) => write!(f, "opt_denoised_{k}"),
            FilterId::OptDenoised(Some(Param::Auto)) => write!(f, "opt_denoised_auto"),
        }
    }
}

impl FromStr for FilterId {
    type Err = CtError;

    /// `name` or `name:param`, e.g. `hamming:0.7`, `hamming:auto`, `opt_denoised:7`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = |msg: String| CtError::Parameter(format!("filter {s:?}: {msg}"));
        let no_arg = |id: FilterId| match arg {
            None => Ok(id),
            Some(_) => Err(bad("takes no parameter".into())),
        };
        match name {
            "ram_lak" | "ramlak" => no_arg(FilterId::RamLak),
            "shepp_logan" => no_arg(FilterId::SheppLogan),
            "cosine" => no_arg(FilterId::Cosine),
            "hamming" => match arg {
                None => Ok(FilterId::Hamming(Param::Fixed(0.55))),
                Some("auto") => Ok(FilterId::Hamming(Param::Auto)),
                Some(b) => {
                    let beta: f64 = b.parse().map_err(|_| bad(format!("bad β {b:?}")))?;
                    if !(0.5..=1.0).contains(&beta) {
                        return Err(bad(format!("β = {beta} outside [1/2, 1]")));
                    }
                    Ok(FilterId::Hamming(Param::Fixed(beta)))
                }
            },
            "opt_reference" => no_arg(FilterId::OptReference),
            "opt_measured" => no_arg(FilterId::OptMeasured),
            "opt_denoised" => match arg {
                None => Ok(FilterId::OptDenoised(None)),
                Some("auto") => Ok(FilterId::OptDenoised(Some(Param::Auto))),
                Some(k) => {
                    let kernel: usize = k.parse().map_err(|_| bad(format!("bad kernel {k:?}")))?;
                    if kernel % 2 == 0 {
                        return Err(bad(format!("kernel {kernel} must be odd")));
                    }
                    Ok(FilterId::OptDenoised(Some(Param::Fixed(kernel))))
                }
            },
            _ => Err(bad("unknown filter".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomChoice {
    SheppLogan,
    Modified,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub phantom: PhantomChoice,
    pub nu: f64,
    pub angle_list: Vec<usize>,
    pub p_noise_list: Vec<f64>,
    pub n_realizations: usize,
    pub filters: Vec<FilterId>,
    pub recon_pixels: usize,
    pub interpolation: Interpolation,
    pub wiener_kernel: Param<usize>,
    pub seed: u64,
    /// Multiplies the injected noise only; filters always see `ε = p·m`.
    pub noise_misestimation_factor: f64,
    pub mask_metrics: bool,
    pub output_dir: PathBuf,
    /// Record wall time per row. Off by default: timings make CSVs differ run to run.
    pub record_timing: bool,
    pub filter_dumps: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            phantom: PhantomChoice::SheppLogan,
            nu: 1.5,
            angle_list: vec![90, 180, 360],
            p_noise_list: vec![0.05, 0.1, 0.15],
            n_realizations: 10,
            filters: vec![
                FilterId::RamLak,
                FilterId::SheppLogan,
                FilterId::Cosine,
                FilterId::Hamming(Param::Auto),
                FilterId::OptReference,
                FilterId::OptMeasured,
                FilterId::OptDenoised(None),
            ],
            recon_pixels: 256,
            interpolation: Interpolation::Linear,
            wiener_kernel: Param::Fixed(5),
            seed: 2024,
            noise_misestimation_factor: 1.0,
            mask_metrics: false,
            output_dir: PathBuf::from("results"),
            record_timing: false,
            filter_dumps: false,
        }
    }
}

fn parse_list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CtError::config(field, format!("cannot parse list item {s:?}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| CtError::config(field, format!("cannot parse {value:?}")))
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CtError::config(field, format!("expected true/false, got {value:?}"))),
    }
}

impl ExperimentConfig {
    /// Parses config text; relative phantom paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CtError::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "phantom" => {
                    cfg.phantom = match value {
                        "shepp_logan" => PhantomChoice::SheppLogan,
                        "modified" | "modified_shepp_logan" => PhantomChoice::Modified,
                        path => PhantomChoice::File(base_dir.join(path)),
                    }
                }
                "phantom.nu" => cfg.nu = parse_one(key, value)?,
                "sweep.angles" => cfg.angle_list = parse_list(key, value)?,
                "sweep.p_noise" => cfg.p_noise_list = parse_list(key, value)?,
                "sweep.realizations" => cfg.n_realizations = parse_one(key, value)?,
                "sweep.filters" => {
                    cfg.filters = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<FilterId>().map_err(|e| CtError::config(key, e.to_string())))
                        .collect::<Result<_>>()?
                }
                "recon.pixels" => cfg.recon_pixels = parse_one(key, value)?,
                "recon.interpolation" => {
                    cfg.interpolation = value
                        .parse()
                        .map_err(|e: CtError| CtError::config(key, e.to_string()))?
                }
                "wiener.kernel" => {
                    cfg.wiener_kernel = if value == "auto" {
                        Param::Auto
                    } else {
                        Param::Fixed(parse_one(key, value)?)
                    }
                }
                "seed" => cfg.seed = parse_one(key, value)?,
                "noise.misestimation" => cfg.noise_misestimation_factor = parse_one(key, value)?,
                "metrics.mask" => cfg.mask_metrics = parse_bool(key, value)?,
                "output.dir" => cfg.output_dir = base_dir.join(value),
                "output.timing" => cfg.record_timing = parse_bool(key, value)?,
                "output.filter_dumps" => cfg.filter_dumps = parse_bool(key, value)?,
                other => return Err(CtError::config(other, "unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CtError::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.angle_list.is_empty() {
            return Err(CtError::config("sweep.angles", "list is empty"));
        }
        if let Some(&n) = self.angle_list.iter().find(|&&n| n < 4) {
            return Err(CtError::config("sweep.angles", format!("N_φ = {n} < 4")));
        }
        if self.p_noise_list.is_empty() {
            return Err(CtError::config("sweep.p_noise", "list is empty"));
        }
        if let Some(p) = self.p_noise_list.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(CtError::config("sweep.p_noise", format!("invalid level {p}")));
        }
        if self.n_realizations == 0 {
            return Err(CtError::config("sweep.realizations", "must be ≥ 1"));
        }
        if self.filters.is_empty() {
            return Err(CtError::config("sweep.filters", "list is empty"));
        }
        if self.recon_pixels < crate::metrics::SSIM_WINDOW {
            return Err(CtError::config(
                "recon.pixels",
                format!("must be ≥ {} for SSIM", crate::metrics::SSIM_WINDOW),
            ));
        }
        if let Param::Fixed(k) = self.wiener_kernel {
            if k == 0 || k % 2 == 0 {
                return Err(CtError::config("wiener.kernel", format!("{k} is not odd")));
            }
        }
        if !(self.noise_misestimation_factor > 0.0 && self.noise_misestimation_factor.is_finite()) {
            return Err(CtError::config("noise.misestimation", "must be > 0"));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(CtError::config("phantom.nu", "must be > 0"));
        }
        Ok(())
    }
}
