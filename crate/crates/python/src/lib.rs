//! Python bindings: geometry, phantoms, noise, filters, reconstruction and metrics.
//!
//! Arrays cross the boundary as flat Python lists in row-major order.

use std::path::PathBuf;

use ctfbp::error::CtError;
use ctfbp::fbp::Interpolation;
use ctfbp::filters::Window;
use ctfbp::geometry::FrequencyGrid;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: CtError) -> PyErr {
    match e {
        CtError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Geometry", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry(ctfbp::ParallelGeometry);

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (n_angles, radius = 1.0))]
    fn new(n_angles: usize, radius: f64) -> PyResult<Self> {
        ctfbp::ParallelGeometry::from_angles(n_angles, radius)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn n_angles(&self) -> usize {
        self.0.n_angles()
    }

    #[getter]
    fn half_count(&self) -> usize {
        self.0.half_count()
    }

    #[getter]
    fn n_radial(&self) -> usize {
        self.0.n_radial()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.0.step()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.0.bandwidth()
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(n_angles={}, half_count={}, radius={})",
            self.0.n_angles(),
            self.0.half_count(),
            self.0.radius()
        )
    }
}

#[pyclass(name = "Sinogram", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySinogram(ctfbp::Sinogram);

#[pymethods]
impl PySinogram {
    #[new]
    fn new(geometry: &PyGeometry, values: Vec<f64>) -> PyResult<Self> {
        ctfbp::Sinogram::from_values(geometry.0, values)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn geometry(&self) -> PyGeometry {
        PyGeometry(*self.0.geometry())
    }

    /// Angle-major flat list of `N_φ · (2M+1)` samples.
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn row(&self, angle_index: usize) -> PyResult<Vec<f64>> {
        if angle_index >= self.0.geometry().n_angles() {
            return Err(PyValueError::new_err(format!("angle index {angle_index} out of range")));
        }
        Ok(self.0.row(angle_index).to_vec())
    }

    fn mean_abs(&self) -> f64 {
        self.0.mean_abs()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        ctfbp::io::write_sinogram(&self.0, &path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ctfbp::io::read_sinogram(&path).map(Self).map_err(to_py)
    }
}

#[pyclass(name = "Image", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyImage(ctfbp::Image);

#[pymethods]
impl PyImage {
    #[getter]
    fn n_pixels(&self) -> usize {
        self.0.n_pixels()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    /// Row-major flat list; row `p` has `y` increasing with `p`.
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn get(&self, p: usize, q: usize) -> PyResult<f64> {
        let n = self.0.n_pixels();
        if p >= n || q >= n {
            return Err(PyValueError::new_err(format!("pixel ({p}, {q}) outside {n}×{n}")));
        }
        Ok(self.0.get(p, q))
    }

    fn save(&self, prefix: PathBuf) -> PyResult<()> {
        ctfbp::io::write_image_bundle(&self.0, &prefix)
            .map(|_| ())
            .map_err(to_py)
    }
}

#[pyclass(name = "Phantom", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPhantom(ctfbp::Phantom);

#[pymethods]
impl PyPhantom {
    #[staticmethod]
    fn shepp_logan() -> Self {
        Self(ctfbp::shepp_logan())
    }

    /// Smooth Shepp–Logan with the default rectangles, normalized on `geometry`.
    #[staticmethod]
    #[pyo3(signature = (geometry, nu = 1.5))]
    fn modified(geometry: &PyGeometry, nu: f64) -> PyResult<Self> {
        ctfbp::phantoms::modified_shepp_logan(&ctfbp::phantoms::default_rectangles(), nu, &geometry.0)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ctfbp::phantoms::parse_phantom(text, "<python>")
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    fn value_at(&self, x: f64, y: f64) -> f64 {
        self.0.value_at(x, y)
    }

    fn radon(&self, s: f64, phi: f64) -> f64 {
        ctfbp::radon_analytic(&self.0, s, phi)
    }

    fn sinogram(&self, geometry: &PyGeometry) -> PyResult<PySinogram> {
        ctfbp::radon_sample(&self.0, &geometry.0)
            .map(PySinogram)
            .map_err(to_py)
    }

    fn rasterize(&self, n_pixels: usize) -> PyResult<PyImage> {
        ctfbp::rasterize(&self.0, n_pixels)
            .map(PyImage)
            .map_err(to_py)
    }
}

#[pyclass(name = "Filter", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFilter(ctfbp::FilterSpec);

#[pymethods]
impl PyFilter {
    fn frequencies(&self) -> Vec<f64> {
        self.0.grid().frequencies().to_vec()
    }

    fn values(&self) -> Vec<f64> {
        self.0.samples().to_vec()
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.0.bandwidth()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// `ε = p_noise · mean|g|` for a clean sinogram.
#[pyfunction]
fn noise_level(p_noise: f64, sinogram: &PySinogram) -> f64 {
    ctfbp::noise::noise_level(p_noise, &sinogram.0)
}

/// Adds iid Gaussian noise of standard deviation `level`, reproducible from `seed`.
#[pyfunction]
fn add_noise(sinogram: &PySinogram, level: f64, seed: u64) -> PyResult<PySinogram> {
    ctfbp::add_white_noise(&sinogram.0, &ctfbp::NoiseSpec::with_level(level, seed))
        .map(PySinogram)
        .map_err(to_py)
}

/// Classical filter by name: `ram_lak`, `shepp_logan`, `cosine` or `hamming`.
#[pyfunction]
#[pyo3(signature = (geometry, name, beta = 0.55))]
fn classical_filter(geometry: &PyGeometry, name: &str, beta: f64) -> PyResult<PyFilter> {
    let window = match name {
        "ram_lak" => Window::RamLak,
        "shepp_logan" => Window::SheppLogan,
        "cosine" => Window::Cosine,
        "hamming" => Window::hamming(beta).map_err(to_py)?,
        other => return Err(PyValueError::new_err(format!("unknown window {other:?}"))),
    };
    let grid = FrequencyGrid::for_geometry(&geometry.0);
    ctfbp::filter_from_window(&window, &grid, geometry.0.bandwidth())
        .map(PyFilter)
        .map_err(to_py)
}

/// Noise-optimized filter designed from `data` (clean or measured) at level `epsilon`.
/// With `kernel`, the data are Wiener-denoised first.
#[pyfunction]
#[pyo3(signature = (data, epsilon, kernel = None))]
fn optimized_filter(data: &PySinogram, epsilon: f64, kernel: Option<usize>) -> PyResult<PyFilter> {
    let grid = FrequencyGrid::for_geometry(data.0.geometry());
    let spec = match kernel {
        Some(k) => ctfbp::optimized_filter_denoised(&data.0, &grid, epsilon, k),
        None => ctfbp::optimized_filter_measured(&data.0, &grid, epsilon),
    };
    spec.map(PyFilter).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (sinogram, filter, n_pixels = 256, interpolation = "linear"))]
fn reconstruct(
    py: Python<'_>,
    sinogram: &PySinogram,
    filter: &PyFilter,
    n_pixels: usize,
    interpolation: &str,
) -> PyResult<PyImage> {
    let interp: Interpolation = interpolation.parse().map_err(to_py)?;
    let (sino, spec) = (&sinogram.0, &filter.0);
    py.detach(|| ctfbp::reconstruct(sino, spec, n_pixels, interp))
        .map(PyImage)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (image, reference, mask = false))]
fn mse(image: &PyImage, reference: &PyImage, mask: bool) -> PyResult<f64> {
    ctfbp::mse(&image.0, &reference.0, mask).map_err(to_py)
}

#[pyfunction]
fn ssim(image: &PyImage, reference: &PyImage) -> PyResult<f64> {
    ctfbp::ssim(&image.0, &reference.0).map_err(to_py)
}

#[pymodule]
fn ctfbp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PySinogram>()?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyPhantom>()?;
    m.add_class::<PyFilter>()?;
    m.add_function(wrap_pyfunction!(noise_level, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(classical_filter, m)?)?;
    m.add_function(wrap_pyfunction!(optimized_filter, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    Ok(())
}
