//! Python bindings: configuration, single-point rates and image rendering.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pdcsim::cli::{Overrides, SimulationConfig};
use pdcsim::detector::{render_spectrum, SpectrumImage};
use pdcsim::dispersion::Polarization;
use pdcsim::interaction::{self, PhysicsModel, ProcessKind};
use pdcsim::mcint::estimator::stream_rng;
use pdcsim::SimError;

fn to_py(e: SimError) -> PyErr {
    match e {
        SimError::Io { .. } | SimError::Format(_) => PyIOError::new_err(e.to_string()),
        SimError::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn process(name: &str) -> PyResult<ProcessKind> {
    match name {
        "down" => Ok(ProcessKind::DownConversion),
        "up" => Ok(ProcessKind::UpConversion),
        _ => Err(PyValueError::new_err(format!(
            "process must be 'down' or 'up', got {name:?}"
        ))),
    }
}

fn polarization(name: &str) -> PyResult<Polarization> {
    match name {
        "o" | "ordinary" => Ok(Polarization::Ordinary),
        "e" | "extraordinary" => Ok(Polarization::Extraordinary),
        _ => Err(PyValueError::new_err(format!(
            "polarization must be 'o' or 'e', got {name:?}"
        ))),
    }
}

/// Validated simulation configuration.
#[pyclass(name = "Config", module = "pdcsim_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SimulationConfig,
}

#[pymethods]
impl PyConfig {
    /// Bundled default configuration.
    #[staticmethod]
    fn default() -> Self {
        PyConfig {
            inner: SimulationConfig::bundled_default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: SimulationConfig::from_toml(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: pdcsim::cli::load_config(path.as_ref()).map_err(to_py)?,
        })
    }

    /// Copy with overrides applied and revalidated.
    #[pyo3(signature = (seed=None, samples=None, threads=None, max_order=None))]
    fn with_overrides(
        &self,
        seed: Option<u64>,
        samples: Option<usize>,
        threads: Option<usize>,
        max_order: Option<i32>,
    ) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        Overrides {
            seed,
            samples,
            threads,
            max_order,
            ..Default::default()
        }
        .apply(&mut inner)
        .map_err(to_py)?;
        Ok(PyConfig { inner })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.canonical().map_err(to_py)
    }

    fn hash(&self) -> PyResult<String> {
        self.inner.hash().map_err(to_py)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn samples_per_pixel(&self) -> usize {
        self.inner.samples_per_pixel
    }

    #[getter]
    fn max_qpm_order(&self) -> i32 {
        self.inner.max_qpm_order
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(seed={}, samples_per_pixel={}, max_qpm_order={})",
            self.inner.seed, self.inner.samples_per_pixel, self.inner.max_qpm_order
        )
    }
}

/// Expected-count image with standard errors.
#[pyclass(name = "Image", module = "pdcsim_py", frozen)]
struct PyImage {
    inner: SpectrumImage,
}

#[pymethods]
impl PyImage {
    /// (rows, columns) = (angles, wavelengths).
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_y, self.inner.n_x)
    }

    /// Row-major counts as a list of rows.
    #[getter]
    fn counts(&self) -> Vec<Vec<f64>> {
        self.inner.counts.chunks(self.inner.n_x).map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn stderr(&self) -> Vec<Vec<f64>> {
        self.inner.stderr.chunks(self.inner.n_x).map(<[f64]>::to_vec).collect()
    }

    /// Column-centre wavelengths, m.
    #[getter]
    fn wavelengths(&self) -> Vec<f64> {
        self.inner.wavelengths.clone()
    }

    /// Row-centre external angles, rad.
    #[getter]
    fn angles(&self) -> Vec<f64> {
        self.inner.angles.clone()
    }

    #[getter]
    fn process(&self) -> String {
        self.inner.metadata.process.clone()
    }

    #[getter]
    fn config_hash(&self) -> String {
        self.inner.metadata.config_hash.clone()
    }

    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.inner.metadata.diagnostics.clone()
    }

    fn total(&self) -> f64 {
        self.inner.total()
    }
}

/// Render a detector image, optionally restricted to a rectangle of pixels.
#[pyfunction]
#[pyo3(signature = (config, process="down", rows=None, columns=None))]
fn render(
    py: Python<'_>,
    config: &PyConfig,
    process: &str,
    rows: Option<Vec<usize>>,
    columns: Option<Vec<usize>>,
) -> PyResult<PyImage> {
    let kind = self::process(process)?;
    let cfg = &config.inner;
    let model = cfg.physics_model().map_err(to_py)?;
    let layout = cfg.layout().map_err(to_py)?;
    let mut settings = cfg.render_settings();
    settings.rows = rows;
    settings.columns = columns;
    let hash = cfg.hash().map_err(to_py)?;
    let mut image = py
        .detach(|| render_spectrum(&model, &layout, kind, &settings))
        .map_err(to_py)?;
    image.metadata.config_hash = hash;
    Ok(PyImage { inner: image })
}

/// Spectral-angular rate density at one signal mode: (value, stderr).
#[pyfunction]
#[pyo3(signature = (config, wavelength, theta_x, theta_y, process="down", polarization="e", samples=20000, stream=0))]
#[allow(clippy::too_many_arguments)]
fn rate_density(
    config: &PyConfig,
    wavelength: f64,
    theta_x: f64,
    theta_y: f64,
    process: &str,
    polarization: &str,
    samples: usize,
    stream: u64,
) -> PyResult<(f64, f64)> {
    let kind = self::process(process)?;
    let pol = self::polarization(polarization)?;
    let model: PhysicsModel = config.inner.physics_model().map_err(to_py)?;
    let signal = model
        .signal_from_external(wavelength, theta_x, theta_y, pol)
        .map_err(to_py)?;
    let mut rng = stream_rng(config.inner.seed, stream);
    let est = model.rate_density(&signal, kind, samples, &mut rng).map_err(to_py)?;
    Ok((est.value, est.stderr))
}

/// Bose–Einstein occupation of a mode at angular frequency `omega`, rad/s.
#[pyfunction]
fn thermal_occupation(omega: f64, temperature_k: f64) -> PyResult<f64> {
    interaction::thermal_occupation(omega, temperature_k).map_err(to_py)
}

/// Rate prefactor Z and interaction time for the configured pump and crystal.
#[pyfunction]
fn rate_prefactor(config: &PyConfig) -> PyResult<(f64, f64)> {
    let pump = config.inner.pump_spec();
    let crystal = config.inner.crystal_spec().map_err(to_py)?;
    let t = interaction::interaction_time(&pump, &crystal).map_err(to_py)?;
    let z = interaction::rate_prefactor(&pump, &crystal, t).map_err(to_py)?;
    Ok((z, t))
}

#[pymodule]
fn pdcsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(rate_density, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_occupation, m)?)?;
    m.add_function(wrap_pyfunction!(rate_prefactor, m)?)?;
    Ok(())
}
