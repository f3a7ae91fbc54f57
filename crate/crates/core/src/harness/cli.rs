//! `ctfbp` command line. Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::CtError;
use crate::fbp::{reconstruct, Interpolation};
use crate::filters::{FilterSpec, Window};
use crate::geometry::{FrequencyGrid, ParallelGeometry, Sinogram};
use crate::harness::config::{ExperimentConfig, FilterId};
use crate::harness::experiment::{build_filter, run_sweep, thread_pool_from_env, FilterInputs, ResolvedFilter};
use crate::io::{read_image, read_sinogram, write_image_bundle, write_sinogram};
use crate::metrics::report;
use crate::noise::{add_white_noise, NoiseSpec};
use crate::phantoms::{
    default_rectangles, modified_shepp_logan, radon_sample, rasterize, read_phantom, shepp_logan,
    Phantom,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ctfbp", version, about = "Parallel-beam FBP with noise-optimized filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rasterize a phantom to CTIM + PGM.
    Phantom(PhantomArgs),
    /// Sample the analytic sinogram of a phantom, optionally with noise.
    Sinogram(SinogramArgs),
    /// Reconstruct a CTSG sinogram.
    Reconstruct(ReconstructArgs),
    /// Write the samples of a filter as CSV.
    FilterDump(FilterDumpArgs),
    /// Run an experiment sweep from a config file.
    Sweep(SweepArgs),
    /// Compare a reconstruction against a reference image.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
struct PhantomSource {
    /// shepp_logan, modified, or a phantom file.
    #[arg(long, default_value = "shepp_logan")]
    phantom: String,
    /// Smoothness of the modified phantom.
    #[arg(long, default_value_t = 1.5)]
    nu: f64,
}

#[derive(Debug, Args)]
struct PhantomArgs {
    #[command(flatten)]
    source: PhantomSource,
    #[arg(long, default_value_t = 256)]
    pixels: usize,
    /// Angle count whose lattice normalizes the modified phantom.
    #[arg(long, default_value_t = 360)]
    n_angles: usize,
    /// Output prefix; writes `<out>.ctim`, `<out>.pgm`, `<out>.pgm.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SinogramArgs {
    #[command(flatten)]
    source: PhantomSource,
    #[arg(long)]
    n_angles: usize,
    #[arg(long, default_value_t = 0.0)]
    p_noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplies the injected noise level.
    #[arg(long, default_value_t = 1.0)]
    misestimation: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// ram_lak, shepp_logan, cosine, hamming, opt_reference, opt_measured, opt_denoised.
    #[arg(long, default_value = "ram_lak")]
    filter: String,
    /// Hamming β in [1/2, 1].
    #[arg(long, default_value_t = 0.55)]
    beta: f64,
    /// Noise standard deviation ε for the optimized filters.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Wiener kernel size for opt_denoised.
    #[arg(long, default_value_t = 5)]
    kernel: usize,
    /// Noiseless sinogram for opt_reference.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long, default_value_t = 256)]
    pixels: usize,
    /// linear or cubic.
    #[arg(long, default_value = "linear")]
    interp: String,
    /// Output prefix; writes `<out>.ctim`, `<out>.pgm`, `<out>.pgm.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FilterDumpArgs {
    #[command(flatten)]
    filter: FilterArgs,
    /// Angle count for the geometry (ignored with --input).
    #[arg(long, default_value_t = 360)]
    n_angles: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Measured sinogram for the optimized filters.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Reconstruction (CTIM).
    #[arg(long)]
    image: PathBuf,
    /// Reference (CTIM).
    #[arg(long)]
    reference: PathBuf,
    /// Restrict MSE to pixels centered in the support disk.
    #[arg(long)]
    mask: bool,
}

/// Failure split by exit code.
enum Failure {
    Usage(String),
    Runtime(CtError),
}

impl From<CtError> for Failure {
    fn from(e: CtError) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses and runs one invocation, printing diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool_from_env() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Sinogram(a) => cmd_sinogram(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::FilterDump(a) => cmd_filter_dump(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} file not found: {}", path.display())))
    }
}

fn geometry_for(n_angles: usize, radius: f64) -> CliResult<ParallelGeometry> {
    ParallelGeometry::from_angles(n_angles, radius).map_err(|e| usage(e.to_string()))
}

fn load_phantom(source: &PhantomSource, n_angles: usize) -> CliResult<Phantom> {
    match source.phantom.as_str() {
        "shepp_logan" => Ok(shepp_logan()),
        "modified" => {
            let geometry = geometry_for(n_angles, 1.0)?;
            Ok(modified_shepp_logan(&default_rectangles(), source.nu, &geometry)?)
        }
        path => {
            let path = Path::new(path);
            require_file(path, "phantom")?;
            Ok(read_phantom(path)?)
        }
    }
}

fn cmd_phantom(a: PhantomArgs) -> CliResult<()> {
    let phantom = load_phantom(&a.source, a.n_angles)?;
    let image = rasterize(&phantom, a.pixels).map_err(|e| usage(e.to_string()))?;
    write_image_bundle(&image, &a.out)?;
    Ok(())
}

fn cmd_sinogram(a: SinogramArgs) -> CliResult<()> {
    if !(a.p_noise >= 0.0 && a.p_noise.is_finite()) {
        return Err(usage(format!("--p-noise must be ≥ 0, got {}", a.p_noise)));
    }
    if !(a.misestimation > 0.0 && a.misestimation.is_finite()) {
        return Err(usage(format!("--misestimation must be > 0, got {}", a.misestimation)));
    }
    let phantom = load_phantom(&a.source, a.n_angles)?;
    let geometry = geometry_for(a.n_angles, phantom.radius())?;
    let clean = radon_sample(&phantom, &geometry)?;
    let spec = NoiseSpec::from_sinogram(a.p_noise, &clean, a.seed);
    let noisy = add_white_noise(&clean, &NoiseSpec { level: spec.level * a.misestimation, ..spec })?;
    write_sinogram(&noisy, &a.out)?;
    println!("epsilon = {:.17e}", spec.level);
    Ok(())
}

/// Resolves `--filter`/`--beta`/... for a measured sinogram.
fn cli_filter(args: &FilterArgs, measurements: &Sinogram, grid: &FrequencyGrid) -> CliResult<FilterSpec> {
    let id: FilterId = args.filter.parse().map_err(|e: CtError| usage(e.to_string()))?;
    if !(args.epsilon >= 0.0 && args.epsilon.is_finite()) {
        return Err(usage(format!("--epsilon must be ≥ 0, got {}", args.epsilon)));
    }
    let resolved = match id {
        FilterId::RamLak => ResolvedFilter::Classical(Window::RamLak),
        FilterId::SheppLogan => ResolvedFilter::Classical(Window::SheppLogan),
        FilterId::Cosine => ResolvedFilter::Classical(Window::Cosine),
        FilterId::Hamming(_) => {
            ResolvedFilter::Classical(Window::hamming(args.beta).map_err(|e| usage(e.to_string()))?)
        }
        FilterId::OptReference => ResolvedFilter::Reference,
        FilterId::OptMeasured => ResolvedFilter::Measured,
        FilterId::OptDenoised(_) => {
            if args.kernel == 0 || args.kernel % 2 == 0 {
                return Err(usage(format!("--kernel must be odd, got {}", args.kernel)));
            }
            ResolvedFilter::Denoised { kernel: args.kernel }
        }
    };
    let reference = match (&resolved, &args.reference) {
        (ResolvedFilter::Reference, Some(path)) => {
            require_file(path, "reference sinogram")?;
            let r = read_sinogram(path)?;
            if r.geometry() != measurements.geometry() {
                return Err(usage("reference sinogram geometry differs from the input"));
            }
            Some(r)
        }
        (ResolvedFilter::Reference, None) => {
            return Err(usage("opt_reference needs --reference <noiseless sinogram>"))
        }
        _ => None,
    };
    let inputs = FilterInputs {
        reference: reference.as_ref().unwrap_or(measurements),
        measurements,
        level: args.epsilon,
    };
    Ok(build_filter(resolved, grid, inputs)?)
}

fn cmd_reconstruct(a: ReconstructArgs) -> CliResult<()> {
    require_file(&a.input, "input sinogram")?;
    let interp: Interpolation = a.interp.parse().map_err(|e: CtError| usage(e.to_string()))?;
    if a.pixels < 2 {
        return Err(usage(format!("--pixels must be ≥ 2, got {}", a.pixels)));
    }
    let sino = read_sinogram(&a.input)?;
    let grid = FrequencyGrid::for_geometry(sino.geometry());
    let filter = cli_filter(&a.filter, &sino, &grid)?;
    let image = reconstruct(&sino, &filter, a.pixels, interp)?;
    write_image_bundle(&image, &a.out)?;
    Ok(())
}

fn cmd_filter_dump(a: FilterDumpArgs) -> CliResult<()> {
    let sino = match &a.input {
        Some(path) => {
            require_file(path, "input sinogram")?;
            read_sinogram(path)?
        }
        None => Sinogram::zeros(geometry_for(a.n_angles, a.radius)?),
    };
    let grid = FrequencyGrid::for_geometry(sino.geometry());
    let filter = cli_filter(&a.filter, &sino, &grid)?;
    match &a.out {
        Some(path) => filter.write_csv(path)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(filter.to_csv().as_bytes())
                .map_err(|e| CtError::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CliResult<()> {
    require_file(&a.config, "config")?;
    let mut cfg = ExperimentConfig::load(&a.config).map_err(|e| match e {
        CtError::Io { .. } => Failure::Runtime(e),
        other => usage(other.to_string()),
    })?;
    if let Some(dir) = a.out_dir {
        cfg.output_dir = dir;
    }
    let path = run_sweep(&cfg)?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> CliResult<()> {
    require_file(&a.image, "image")?;
    require_file(&a.reference, "reference image")?;
    let image = read_image(&a.image)?;
    let reference = read_image(&a.reference)?;
    let r = report(&image, &reference, a.mask)?;
    println!("mse = {:.17e}", r.mse);
    println!("ssim = {:.17e}", r.ssim);
    println!("pixels = {}", r.n_pixels);
    println!("masked = {}", r.masked);
    Ok(())
}
