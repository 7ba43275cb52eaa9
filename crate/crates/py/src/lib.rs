//! Python bindings for the `ofdm_secrecy` core crate.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ofdm_secrecy as core;
use ofdm_secrecy::mi::monte_carlo::mc_mutual_info;
use ofdm_secrecy::mi::{gaussian_mi, gaussian_mmse};

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Unit-energy constellation with prior probabilities.
#[pyclass(frozen, skip_from_py_object, name = "Constellation", module = "ofdm_secrecy")]
#[derive(Clone)]
struct PyConstellation(core::Constellation);

#[pymethods]
impl PyConstellation {
    /// Arbitrary points and priors; rescaled to unit average energy.
    #[new]
    #[pyo3(signature = (points, probs=None, label="custom"))]
    fn new(points: Vec<Complex64>, probs: Option<Vec<f64>>, label: &str) -> PyResult<Self> {
        let probs = probs.unwrap_or_else(|| vec![1.0 / points.len().max(1) as f64; points.len()]);
        core::Constellation::custom(points, probs, label).py_err().map(Self)
    }

    #[staticmethod]
    fn psk(order: usize) -> PyResult<Self> {
        core::Constellation::psk(order).py_err().map(Self)
    }

    #[staticmethod]
    fn square_qam(order: usize) -> PyResult<Self> {
        core::Constellation::square_qam(order).py_err().map(Self)
    }

    #[staticmethod]
    fn pam_two_scale() -> Self {
        Self(core::Constellation::pam_two_scale())
    }

    #[staticmethod]
    fn by_name(name: &str) -> PyResult<Self> {
        core::Constellation::by_name(name).py_err().map(Self)
    }

    #[getter]
    fn points(&self) -> Vec<Complex64> {
        self.0.points().to_vec()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    #[getter]
    fn label(&self) -> &str {
        self.0.label()
    }

    /// Entropy of the priors in bits.
    fn entropy(&self) -> f64 {
        self.0.entropy()
    }

    fn rotated(&self, theta: f64) -> Self {
        Self(self.0.rotated(theta))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Constellation('{}', {} points)", self.0.label(), self.0.len())
    }
}

/// Quadrature evaluator of mutual information (bits) and MMSE.
#[pyclass(frozen, name = "MiEvaluator", module = "ofdm_secrecy")]
struct PyMiEvaluator(core::MiEvaluator);

#[pymethods]
impl PyMiEvaluator {
    #[new]
    #[pyo3(signature = (constellation, order=None))]
    fn new(constellation: &PyConstellation, order: Option<usize>) -> PyResult<Self> {
        let c = constellation.0.clone();
        match order {
            Some(n) => core::MiEvaluator::with_order(c, n).py_err().map(Self),
            None => Ok(Self(core::MiEvaluator::new(c))),
        }
    }

    fn mutual_info(&self, gamma: f64) -> PyResult<f64> {
        self.0.mutual_info(gamma).py_err()
    }

    fn mmse(&self, gamma: f64) -> PyResult<f64> {
        self.0.mmse(gamma).py_err()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn is_separable(&self) -> bool {
        self.0.is_separable()
    }
}

/// Power gains of one carrier on the legitimate and eavesdropper links.
#[pyclass(frozen, from_py_object, name = "SubcarrierChannel", module = "ofdm_secrecy")]
#[derive(Clone, Copy)]
struct PyChannel(core::SubcarrierChannel);

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (h_gain, g_gain, index=0))]
    fn new(h_gain: f64, g_gain: f64, index: usize) -> PyResult<Self> {
        core::SubcarrierChannel::new(index, h_gain, g_gain).py_err().map(Self)
    }

    #[getter]
    fn index(&self) -> usize {
        self.0.index
    }

    #[getter]
    fn h_gain(&self) -> f64 {
        self.0.h_gain
    }

    #[getter]
    fn g_gain(&self) -> f64 {
        self.0.g_gain
    }

    fn __repr__(&self) -> String {
        format!("SubcarrierChannel(h_gain={}, g_gain={}, index={})", self.0.h_gain, self.0.g_gain, self.0.index)
    }
}

/// Per-carrier input: a finite constellation, or Gaussian when built with `gaussian()`.
#[pyclass(frozen, skip_from_py_object, name = "InputModel", module = "ofdm_secrecy")]
#[derive(Clone)]
struct PyInputModel(core::InputModel);

#[pymethods]
impl PyInputModel {
    #[new]
    fn new(constellation: &PyConstellation) -> Self {
        Self(core::InputModel::discrete(constellation.0.clone()))
    }

    #[staticmethod]
    fn gaussian() -> Self {
        Self(core::InputModel::Gaussian)
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn mutual_info(&self, gamma: f64) -> PyResult<f64> {
        self.0.mutual_info(gamma).py_err()
    }

    fn subcarrier_rate(&self, channel: &PyChannel, p: f64) -> PyResult<f64> {
        self.0.subcarrier_rate(&channel.0, p).py_err()
    }

    /// Average secrecy rate over carriers, bits per carrier.
    fn total_rate(&self, channels: Vec<PyChannel>, powers: Vec<f64>, budget: f64) -> PyResult<f64> {
        let alloc = core::PowerAllocation::new(powers, budget).py_err()?;
        self.0.total_rate(&unwrap(&channels), &alloc).py_err()
    }
}

fn unwrap(channels: &[PyChannel]) -> Vec<core::SubcarrierChannel> {
    channels.iter().map(|c| c.0).collect()
}

fn wrap(channels: Vec<core::SubcarrierChannel>) -> Vec<PyChannel> {
    channels.into_iter().map(PyChannel).collect()
}

#[pyfunction]
#[pyo3(name = "gaussian_mi")]
fn py_gaussian_mi(gamma: f64) -> PyResult<f64> {
    gaussian_mi(gamma).py_err()
}

#[pyfunction]
#[pyo3(name = "gaussian_mmse")]
fn py_gaussian_mmse(gamma: f64) -> PyResult<f64> {
    gaussian_mmse(gamma).py_err()
}

/// Monte Carlo estimate of `I(gamma)`; returns `(estimate, std_error)`.
#[pyfunction]
#[pyo3(signature = (constellation, gamma, n_samples=1_000_000, seed=0))]
fn monte_carlo_mi(py: Python<'_>, constellation: &PyConstellation, gamma: f64, n_samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let c = constellation.0.clone();
    let est = py.detach(move || mc_mutual_info(&c, gamma, n_samples, seed)).py_err()?;
    Ok((est.estimate, est.std_error))
}

#[pyfunction]
#[pyo3(signature = (n_carriers, mean_h_gain=1.0, mean_g_gain=0.5, seed=0))]
fn iid_rayleigh(n_carriers: usize, mean_h_gain: f64, mean_g_gain: f64, seed: u64) -> PyResult<Vec<PyChannel>> {
    core::iid_rayleigh(n_carriers, mean_h_gain, mean_g_gain, seed)
        .py_err()
        .map(|r| wrap(r.channels))
}

#[pyfunction]
fn multipath(n_carriers: usize, taps_h: Vec<Complex64>, taps_g: Vec<Complex64>) -> PyResult<Vec<PyChannel>> {
    core::multipath(n_carriers, &taps_h, &taps_g)
        .py_err()
        .map(|r| wrap(r.channels))
}

/// Dual power allocation. Returns a dict with `powers`, `u`, `primal_value`,
/// `dual_value`, `gap` and `iterations`.
#[pyfunction]
#[pyo3(signature = (model, channels, budget, p_max=None, inner_grid_points=None, dual_tol=None, refine_iters=None))]
#[allow(clippy::too_many_arguments)]
fn solve_dual<'py>(
    py: Python<'py>,
    model: &PyInputModel,
    channels: Vec<PyChannel>,
    budget: f64,
    p_max: Option<f64>,
    inner_grid_points: Option<usize>,
    dual_tol: Option<f64>,
    refine_iters: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = core::SolverConfig::new(budget);
    cfg.p_max = p_max;
    if let Some(n) = inner_grid_points {
        cfg.inner_grid_points = n;
    }
    if let Some(t) = dual_tol {
        cfg.dual_tol = t;
    }
    if let Some(k) = refine_iters {
        cfg.refine_iters = k;
    }
    let model = model.0.clone();
    let chans = unwrap(&channels);
    let sol = py.detach(move || core::solve_dual(&model, &chans, &cfg)).py_err()?;
    let d = PyDict::new(py);
    d.set_item("powers", sol.alloc.powers().to_vec())?;
    d.set_item("u", sol.u)?;
    d.set_item("primal_value", sol.primal_value)?;
    d.set_item("dual_value", sol.dual_value)?;
    d.set_item("gap", sol.gap)?;
    d.set_item("iterations", sol.iterations)?;
    Ok(d)
}

/// Water-filling-style optimum for Gaussian inputs; returns `(powers, u)`.
#[pyfunction]
fn gaussian_optimal_pa(channels: Vec<PyChannel>, budget: f64) -> PyResult<(Vec<f64>, f64)> {
    let g = core::gaussian_optimal_pa(&unwrap(&channels), budget).py_err()?;
    Ok((g.alloc.powers().to_vec(), g.u))
}

#[pyfunction]
fn equal_pa(channels: Vec<PyChannel>, budget: f64) -> PyResult<Vec<f64>> {
    core::equal_pa(&unwrap(&channels), budget)
        .py_err()
        .map(|a| a.powers().to_vec())
}

/// Exhaustive search on tiny instances; returns `(powers, rate)`.
#[pyfunction]
#[pyo3(signature = (model, channels, budget, grid=200))]
fn brute_force_solve(py: Python<'_>, model: &PyInputModel, channels: Vec<PyChannel>, budget: f64, grid: usize) -> PyResult<(Vec<f64>, f64)> {
    let model = model.0.clone();
    let chans = unwrap(&channels);
    let r = py
        .detach(move || core::brute_force_solve(&model, &chans, budget, grid))
        .py_err()?;
    Ok((r.alloc.powers().to_vec(), r.rate))
}

#[pymodule(name = "ofdm_secrecy")]
fn ofdm_secrecy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstellation>()?;
    m.add_class::<PyMiEvaluator>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyInputModel>()?;
    m.add_function(wrap_pyfunction!(py_gaussian_mi, m)?)?;
    m.add_function(wrap_pyfunction!(py_gaussian_mmse, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_mi, m)?)?;
    m.add_function(wrap_pyfunction!(iid_rayleigh, m)?)?;
    m.add_function(wrap_pyfunction!(multipath, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dual, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_optimal_pa, m)?)?;
    m.add_function(wrap_pyfunction!(equal_pa, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_solve, m)?)?;
    Ok(())
}
