//! Python module `local_hodge`: meshes, Hodge pairs, coderivatives and the
//! batch studies. Structured results come back as plain dicts and lists.

use std::cell::RefCell;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use local_hodge::assembly::{load_vector, verify_condition_a, verify_condition_b, CoefficientSpec};
use local_hodge::harness::{self, StudyConfig};
use local_hodge::hodge::{self, HarmonicMode, SolverKind, Variant};
use local_hodge::mesh::{build_grid, Domain, MeshComplex, MeshKind};
use local_hodge::poly::checks;
use local_hodge::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Solver(_) | Error::Singular(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, value: &impl Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn coefficient(spec: Option<&str>) -> PyResult<CoefficientSpec> {
    match spec {
        None => Ok(CoefficientSpec::Identity),
        Some(s) => serde_json::from_str(s).map_err(|e| PyValueError::new_err(format!("coefficient: {e}"))),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// Evaluate a Python callable as a field; the first exception is kept and
/// re-raised after the Rust call returns.
fn field<'py>(f: &'py Bound<'py, PyAny>, failure: &'py RefCell<Option<PyErr>>) -> impl Fn(&[f64]) -> Vec<f64> + 'py {
    move |x: &[f64]| match f.call1((x.to_vec(),)).and_then(|r| r.extract::<Vec<f64>>()) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Vec::new()
        }
    }
}

/// Structured grid on one of the built-in domains.
#[pyclass(name = "Mesh", module = "local_hodge", frozen)]
struct PyMesh {
    inner: Arc<MeshComplex>,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(domain: &str, kind: &str, level: usize) -> PyResult<Self> {
        Ok(PyMesh { inner: Arc::new(build_grid(parse::<Domain>(domain)?, parse::<MeshKind>(kind)?, level).map_err(err)?) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().to_vec()
    }

    fn cells(&self) -> Vec<Vec<usize>> {
        self.inner.cells().to_vec()
    }

    fn num_faces(&self, j: usize) -> PyResult<usize> {
        if j > self.inner.dim() {
            return Err(PyValueError::new_err(format!("face dimension {j} exceeds {}", self.inner.dim())));
        }
        Ok(self.inner.num_faces(j))
    }

    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(kind={}, dim={}, cells={})", self.inner.kind(), self.inner.dim(), self.inner.num_cells())
    }
}

/// The pair V^{k−1} × V^k with its mixed matrices.
#[pyclass(name = "HodgePair", module = "local_hodge", frozen)]
struct PyHodgePair {
    inner: hodge::HodgePair,
}

#[pymethods]
impl PyHodgePair {
    /// `coefficient` is a JSON coefficient spec, e.g. '{"type": "scalar", "value": 2.0}'.
    #[new]
    #[pyo3(signature = (mesh, k, coefficient=None))]
    fn new(mesh: &PyMesh, k: usize, coefficient: Option<&str>) -> PyResult<Self> {
        if k == 0 {
            return Err(PyValueError::new_err("pair degree must be at least 1"));
        }
        let field = self::coefficient(coefficient)?.build(&mesh.inner, k - 1).map_err(err)?;
        Ok(PyHodgePair { inner: hodge::HodgePair::new(mesh.inner.clone(), k, field).map_err(err)? })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn sigma_dim(&self) -> usize {
        self.inner.sigma_space().dim()
    }

    #[getter]
    fn u_dim(&self) -> usize {
        self.inner.u_space().dim()
    }

    fn harmonic_dim(&self) -> PyResult<usize> {
        Ok(self.inner.harmonic_basis(HarmonicMode::Auto).map_err(err)?.dim())
    }

    /// Load vector ⟨f, φ_i⟩ for a callable x -> list of Alt coefficients.
    fn load_vector(&self, f: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
        let failure = RefCell::new(None);
        let v = load_vector(self.inner.u_space(), field(f, &failure));
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Solve for a load vector; returns a dict with sigma, u, p, residual, solver.
    #[pyo3(signature = (load, variant="lumped", solver="auto"))]
    fn solve(&self, py: Python<'_>, load: Vec<f64>, variant: &str, solver: &str) -> PyResult<Py<PyAny>> {
        let solver: SolverKind = serde_json::from_value(serde_json::Value::String(solver.to_string()))
            .map_err(|_| PyValueError::new_err(format!("unknown solver {solver:?}")))?;
        let h = self.inner.harmonic_basis(HarmonicMode::Auto).map_err(err)?;
        let s = self.inner.solve(&load, parse::<Variant>(variant)?, &h, solver).map_err(err)?;
        to_py(py, &s)
    }

    fn coderivative_local(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        hodge::coderivative_local(&self.inner, &u).map_err(err)
    }

    #[pyo3(signature = (u, variant="exact"))]
    fn coderivative_global(&self, u: Vec<f64>, variant: &str) -> PyResult<Vec<f64>> {
        hodge::coderivative_global(&self.inner, &u, parse::<Variant>(variant)?).map_err(err)
    }

    fn adjoint_residual(&self, u: Vec<f64>, dstar: Vec<f64>) -> PyResult<f64> {
        hodge::adjoint_residual(&self.inner, &u, &dstar).map_err(err)
    }

    #[pyo3(signature = (u, vertex, dof, variant="lumped"))]
    fn locality_probe(&self, py: Python<'_>, u: Vec<f64>, vertex: usize, dof: usize, variant: &str) -> PyResult<Py<PyAny>> {
        let r = hodge::locality_probe(&self.inner, &u, vertex, dof, parse::<Variant>(variant)?, None).map_err(err)?;
        to_py(py, &r)
    }

    /// Balance residuals for k = n on every cell, the whole mesh and random unions.
    #[pyo3(signature = (sigma, load, unions=10, seed=0))]
    fn conservation(&self, py: Python<'_>, sigma: Vec<f64>, load: Vec<f64>, unions: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let r = hodge::ConservationReport::compute(&self.inner, &sigma, &load, unions, seed).map_err(err)?;
        to_py(py, &r)
    }
}

fn config(text: &str) -> PyResult<StudyConfig> {
    StudyConfig::from_json_str(text).map_err(err)
}

/// Convergence study from a JSON config; returns (report dict, csv text).
#[pyfunction]
fn run_convergence(py: Python<'_>, config_json: &str) -> PyResult<(Py<PyAny>, String)> {
    let r = harness::run_convergence(&config(config_json)?).map_err(err)?;
    Ok((to_py(py, &r)?, harness::convergence_csv(&r)))
}

#[pyfunction]
fn run_locality(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &harness::run_locality(&config(config_json)?).map_err(err)?)
}

#[pyfunction]
fn run_infsup(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &harness::run_infsup(&config(config_json)?).map_err(err)?)
}

#[pyfunction]
fn run_solve(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &harness::run_solve(&config(config_json)?).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n_max=4, seed=2024))]
fn run_unisolvency(py: Python<'_>, n_max: usize, seed: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &harness::run_unisolvency(n_max, seed).map_err(err)?)
}

/// Exact checks of d∘d, κ∘κ, the homotopy formula and the product rule.
#[pyfunction]
#[pyo3(signature = (n_max=4, samples=100, seed=1))]
fn algebra_suite(py: Python<'_>, n_max: usize, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &checks::algebra_suite(n_max, samples, seed).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (domain, kind, k, levels, coefficient=None))]
fn condition_a(py: Python<'_>, domain: &str, kind: &str, k: usize, levels: Vec<usize>, coefficient: Option<&str>) -> PyResult<Py<PyAny>> {
    let spec = self::coefficient(coefficient)?;
    to_py(py, &verify_condition_a(parse(domain)?, parse(kind)?, k, &levels, &spec).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (mesh, k, trials=5, seed=0))]
fn condition_b(py: Python<'_>, mesh: &PyMesh, k: usize, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &verify_condition_b(&mesh.inner, k, trials, seed, None).map_err(err)?)
}

#[pymodule]
#[pyo3(name = "local_hodge")]
fn local_hodge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyHodgePair>()?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_locality, m)?)?;
    m.add_function(wrap_pyfunction!(run_infsup, m)?)?;
    m.add_function(wrap_pyfunction!(run_solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_unisolvency, m)?)?;
    m.add_function(wrap_pyfunction!(algebra_suite, m)?)?;
    m.add_function(wrap_pyfunction!(condition_a, m)?)?;
    m.add_function(wrap_pyfunction!(condition_b, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
