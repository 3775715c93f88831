//! Python bindings: `import pyqrd`.
//!
//! Operators are passed as nested lists of complex (or real) numbers.
//! Divergence values come back as Python floats, with `inf` for +∞.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use qrd::channels::{self, Channel, ChannelDivergenceKind};
use qrd::divergences::{self, DivergenceParams, ZParam};
use qrd::families::FamilySpec;
use qrd::lab::{run_suite, Suite};
use qrd::opcore::C64;
use qrd::{measured, CMat, HermitianOperator};

fn py_err(e: qrd::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_cmat(rows: &[Vec<C64>]) -> PyResult<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(CMat::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_cmat(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn z_param(z: f64) -> ZParam {
    if z == f64::INFINITY {
        ZParam::Infinity
    } else if z == 0.0 {
        ZParam::ZeroLimit
    } else {
        ZParam::Finite(z)
    }
}

/// A Hermitian matrix with its cached spectral decomposition.
#[pyclass(name = "Operator", frozen)]
#[derive(Clone)]
struct PyOperator(HermitianOperator);

#[pymethods]
impl PyOperator {
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        HermitianOperator::new(to_cmat(&rows)?).map(PyOperator).map_err(py_err)
    }

    #[staticmethod]
    fn diagonal(values: Vec<f64>) -> Self {
        PyOperator(HermitianOperator::diagonal(&values))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        from_cmat(self.0.matrix())
    }

    fn is_psd(&self) -> bool {
        self.0.check_psd().is_ok()
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, trace={})", self.0.dim(), self.0.trace())
    }
}

/// `D_{α,z}(ρ‖σ)`; pass `z=float("inf")` or `z=0` for the limits.
#[pyfunction]
fn d_alpha_z(rho: &PyOperator, sigma: &PyOperator, alpha: f64, z: f64) -> PyResult<f64> {
    let params = DivergenceParams::new(alpha, z_param(z)).map_err(py_err)?;
    Ok(divergences::d_alpha_z(&rho.0, &sigma.0, params).map_err(py_err)?.d.to_f64())
}

#[pyfunction]
fn q_alpha_z(rho: &PyOperator, sigma: &PyOperator, alpha: f64, z: f64) -> PyResult<f64> {
    let params = DivergenceParams::new(alpha, z_param(z)).map_err(py_err)?;
    Ok(divergences::q_alpha_z(&rho.0, &sigma.0, params).map_err(py_err)?.to_f64())
}

#[pyfunction]
fn d_max(rho: &PyOperator, sigma: &PyOperator) -> PyResult<f64> {
    Ok(divergences::d_max(&rho.0, &sigma.0).map_err(py_err)?.to_f64())
}

#[pyfunction]
fn umegaki(rho: &PyOperator, sigma: &PyOperator) -> PyResult<f64> {
    Ok(divergences::umegaki(&rho.0, &sigma.0).map_err(py_err)?.to_f64())
}

#[pyfunction]
fn d_hat(rho: &PyOperator, sigma: &PyOperator, alpha: f64) -> PyResult<f64> {
    Ok(divergences::d_hat_alpha(&rho.0, &sigma.0, alpha).map_err(py_err)?.d.to_f64())
}

#[pyfunction]
fn d_alpha_zero(rho: &PyOperator, sigma: &PyOperator, alpha: f64) -> PyResult<f64> {
    Ok(divergences::d_alpha_zero(&rho.0, &sigma.0, alpha).map_err(py_err)?.d.to_f64())
}

/// Lower bound on the measured divergence; deterministic for a given seed.
#[pyfunction]
#[pyo3(signature = (rho, sigma, alpha, seed, restarts = 8))]
fn measured_renyi(rho: &PyOperator, sigma: &PyOperator, alpha: f64, seed: u64, restarts: usize) -> PyResult<f64> {
    Ok(measured::measured_renyi_lower(&rho.0, &sigma.0, alpha, restarts, seed).map_err(py_err)?.value.to_f64())
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, alpha, seed, restarts = 8))]
fn test_measured(rho: &PyOperator, sigma: &PyOperator, alpha: f64, seed: u64, restarts: usize) -> PyResult<f64> {
    Ok(measured::test_measured(&rho.0, &sigma.0, alpha, restarts, seed).map_err(py_err)?.value.to_f64())
}

/// Generates `(rho, sigma)` from a family description such as
/// `'{"family": "pure_family", "c": 1.0, "eps": 0.25}'`.
#[pyfunction]
fn family(spec_json: &str) -> PyResult<(PyOperator, PyOperator)> {
    let spec: FamilySpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (rho, sigma) = spec.generate().map_err(py_err)?;
    Ok((PyOperator(rho), PyOperator(sigma)))
}

/// A quantum channel given by Kraus operators.
#[pyclass(name = "Channel", frozen)]
struct PyChannel(Channel);

#[pymethods]
impl PyChannel {
    #[new]
    fn new(kraus: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let ks = kraus.iter().map(|k| to_cmat(k)).collect::<PyResult<Vec<_>>>()?;
        Channel::from_kraus(ks).map(PyChannel).map_err(py_err)
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        PyChannel(Channel::identity(d))
    }

    #[staticmethod]
    fn depolarizing(d: usize, p: f64) -> PyResult<Self> {
        Channel::depolarizing(d, p).map(PyChannel).map_err(py_err)
    }

    fn apply(&self, rho: &PyOperator) -> PyResult<PyOperator> {
        self.0.apply(&rho.0).map(PyOperator).map_err(py_err)
    }

    fn choi(&self) -> PyOperator {
        PyOperator(self.0.choi().clone())
    }
}

#[pyfunction]
fn channel_dmax(n1: &PyChannel, n2: &PyChannel) -> PyResult<f64> {
    Ok(channels::channel_dmax(&n1.0, &n2.0).map_err(py_err)?.to_f64())
}

/// Sandwiched channel divergence at α (a certified lower bound).
#[pyfunction]
#[pyo3(signature = (n1, n2, alpha, seed, restarts = 32))]
fn channel_sandwiched(n1: &PyChannel, n2: &PyChannel, alpha: f64, seed: u64, restarts: usize) -> PyResult<f64> {
    let kind = ChannelDivergenceKind::Renyi { alpha, z: ZParam::Finite(alpha) };
    kind.check_whitelisted().map_err(py_err)?;
    Ok(channels::channel_divergence(&n1.0, &n2.0, kind, restarts, seed).map_err(py_err)?.value.to_f64())
}

/// Runs a verification suite and returns its report as a JSON string.
#[pyfunction]
fn verify(py: Python<'_>, suite: &str, trials: usize, seed: u64) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(py_err)?;
    let report = py.allow_threads(|| run_suite(suite, trials, seed));
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
pub fn pyqrd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(d_alpha_z, m)?)?;
    m.add_function(wrap_pyfunction!(q_alpha_z, m)?)?;
    m.add_function(wrap_pyfunction!(d_max, m)?)?;
    m.add_function(wrap_pyfunction!(umegaki, m)?)?;
    m.add_function(wrap_pyfunction!(d_hat, m)?)?;
    m.add_function(wrap_pyfunction!(d_alpha_zero, m)?)?;
    m.add_function(wrap_pyfunction!(measured_renyi, m)?)?;
    m.add_function(wrap_pyfunction!(test_measured, m)?)?;
    m.add_function(wrap_pyfunction!(family, m)?)?;
    m.add_function(wrap_pyfunction!(channel_dmax, m)?)?;
    m.add_function(wrap_pyfunction!(channel_sandwiched, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
