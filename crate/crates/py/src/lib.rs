//! Python bindings. Measures are passed as spec dicts (the same JSON the CLI
//! reads); reports come back as plain dicts.

use freeprob::entropy;
use freeprob::fockq;
use freeprob::freeconv;
use freeprob::ineq::{self, Weights};
use freeprob::measure::DEFAULT_GRID_SIZE;
use freeprob::ncpoly::{tangent_inequality_check, MatrixTuple, NCPoly};
use freeprob::stein;
use freeprob::transforms;
use freeprob::{Error, Measure1D};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) | Error::VarMismatch { .. } | Error::IndexOutOfRange { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn measure_of(spec: &Bound<'_, PyAny>, grid_size: usize) -> PyResult<Measure1D> {
    let text: String = spec.py().import("json")?.call_method1("dumps", (spec,))?.extract()?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Measure1D::from_json(&v, grid_size).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, grid_size = DEFAULT_GRID_SIZE))]
fn entropy_report<'py>(spec: &Bound<'py, PyAny>, grid_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let mu = measure_of(spec, grid_size)?;
    to_py(spec.py(), &entropy::entropy_report(&mu).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (spec, rho = 1.0, grid_size = DEFAULT_GRID_SIZE))]
fn fisher(spec: &Bound<'_, PyAny>, rho: f64, grid_size: usize) -> PyResult<(f64, f64)> {
    entropy::fisher_pair(&measure_of(spec, grid_size)?, rho).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, degree = 6, ridge = stein::DEFAULT_RIDGE, grid_size = DEFAULT_GRID_SIZE))]
fn stein_kernel<'py>(spec: &Bound<'py, PyAny>, degree: usize, ridge: f64, grid_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let mu = measure_of(spec, grid_size)?;
    to_py(spec.py(), &stein::estimate_kernel(&mu, degree, ridge).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (spec, xs, grid_size = DEFAULT_GRID_SIZE))]
fn hilbert(spec: &Bound<'_, PyAny>, xs: Vec<f64>, grid_size: usize) -> PyResult<Vec<f64>> {
    transforms::hilbert_many(&measure_of(spec, grid_size)?, &xs).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, z, grid_size = DEFAULT_GRID_SIZE))]
fn cauchy(spec: &Bound<'_, PyAny>, z: Complex64, grid_size: usize) -> PyResult<Complex64> {
    transforms::cauchy(&measure_of(spec, grid_size)?, z).map_err(py_err)
}

/// μ ⊞ ν in the grid form of the measure spec.
#[pyfunction]
#[pyo3(signature = (spec1, spec2, grid_size = DEFAULT_GRID_SIZE))]
fn free_add<'py>(spec1: &Bound<'py, PyAny>, spec2: &Bound<'py, PyAny>, grid_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let m = freeconv::free_add(&measure_of(spec1, grid_size)?, &measure_of(spec2, grid_size)?).map_err(py_err)?;
    to_py(spec1.py(), &m.to_json())
}

#[pyfunction]
#[pyo3(signature = (spec, rho = 1.0, degree = 8, grid_size = DEFAULT_GRID_SIZE))]
fn static_checks<'py>(spec: &Bound<'py, PyAny>, rho: f64, degree: usize, grid_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let mu = measure_of(spec, grid_size)?;
    let reports = vec![
        ineq::lsi_check(&mu, rho).map_err(py_err)?,
        ineq::hsi_check(&mu, rho, degree).map_err(py_err)?,
        ineq::deficit_check(&mu, rho).map_err(py_err)?,
    ];
    to_py(spec.py(), &reports)
}

#[pyfunction]
#[pyo3(signature = (spec, n_list, grid_size = DEFAULT_GRID_SIZE))]
fn clt<'py>(spec: &Bound<'py, PyAny>, n_list: Vec<usize>, grid_size: usize) -> PyResult<Bound<'py, PyAny>> {
    let mu = measure_of(spec, grid_size)?;
    to_py(spec.py(), &ineq::clt_harness(&mu, &n_list, &Weights::Equal).map_err(py_err)?)
}

/// Ξ report and vacuum moments of the listed words on the truncated q-Fock space.
#[pyfunction]
#[pyo3(signature = (n, q, depth = None, words = Vec::new()))]
fn fock<'py>(py: Python<'py>, n: usize, q: f64, depth: Option<usize>, words: Vec<Vec<usize>>) -> PyResult<Bound<'py, PyDict>> {
    let space = fockq::build_fock(n, q, depth.unwrap_or_else(|| fockq::default_depth(n))).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("xi", to_py(py, &space.xi_report())?)?;
    let moments = words
        .iter()
        .map(|w| space.vacuum_moment(w))
        .collect::<freeprob::Result<Vec<f64>>>()
        .map_err(py_err)?;
    out.set_item("moments", moments)?;
    out.set_item("bound", fockq::example1_bound(n, q))?;
    Ok(out)
}

/// Smallest tangent-line margin over seeded random k×k tuples.
#[pyfunction]
#[pyo3(signature = (poly_text, seed, samples = 200, dim = 4))]
fn tangent_margin(poly_text: &str, seed: u64, samples: usize, dim: usize) -> PyResult<f64> {
    let f = NCPoly::parse(poly_text, None).map_err(py_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let a = MatrixTuple::random(f.n_vars(), dim, &mut rng);
        let b = MatrixTuple::random(f.n_vars(), dim, &mut rng);
        worst = worst.min(tangent_inequality_check(&f, &a, &b).map_err(py_err)?.margin);
    }
    Ok(worst)
}

/// Run the command-line tool in-process; returns its exit status.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    freeprob::cli::run(std::iter::once("freeprob".to_string()).chain(args))
}

#[pymodule]
fn pyfreeprob(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(entropy_report, m)?)?;
    m.add_function(wrap_pyfunction!(fisher, m)?)?;
    m.add_function(wrap_pyfunction!(stein_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy, m)?)?;
    m.add_function(wrap_pyfunction!(free_add, m)?)?;
    m.add_function(wrap_pyfunction!(static_checks, m)?)?;
    m.add_function(wrap_pyfunction!(clt, m)?)?;
    m.add_function(wrap_pyfunction!(fock, m)?)?;
    m.add_function(wrap_pyfunction!(tangent_margin, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
