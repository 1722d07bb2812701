//! Python bindings for `crn-core`.

use crn_core::balance::{self, BALANCE_TOL};
use crn_core::dynamics::{self, IntegrateOptions, LimitCycleOptions, SteadyStateOptions};
use crn_core::equivalence::{self, MembershipOptions, DE_TOL};
use crn_core::linalg::Matrix;
use crn_core::network::{parse_network, serialize_network, MassActionSystem};
use crn_core::transforms::{self, AffineMap, ProjectiveMap};
use crn_core::{fixtures, geometry, CrnError};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: CrnError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn square(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// A mass-action system: vertices in ℝⁿ, directed edges and positive rates.
#[pyclass(name = "System", module = "crn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: MassActionSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (dimension, vertices, edges))]
    fn new(dimension: usize, vertices: Vec<Vec<f64>>, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = MassActionSystem::from_parts(dimension, vertices, &edges).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_network(text).map_err(err)? })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        Ok(Self { inner: fixtures::load(name).map_err(err)? })
    }

    fn to_json(&self) -> String {
        serialize_network(&self.inner)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.network().vertices().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.network().edges().to_vec()
    }

    #[getter]
    fn rates(&self) -> Vec<f64> {
        self.inner.rates().to_vec()
    }

    fn with_rates(&self, rates: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_rates(rates).map_err(err)? })
    }

    fn is_weakly_reversible(&self) -> bool {
        self.inner.network().is_weakly_reversible()
    }

    fn is_reversible(&self) -> bool {
        self.inner.network().is_reversible()
    }

    /// Net reaction vector of each source vertex, keyed by vertex index.
    fn net_reaction_vectors(&self) -> Vec<(usize, Vec<f64>)> {
        self.inner.net_reaction_vectors().iter().map(|(i, v)| (i, v.to_vec())).collect()
    }

    fn rhs(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        dynamics::rhs_eval(&self.inner, &x).map_err(err)
    }

    fn __repr__(&self) -> String {
        let g = self.inner.network();
        format!("System(dimension={}, vertices={}, edges={})", g.dimension(), g.num_vertices(), g.num_edges())
    }
}

#[pyfunction]
#[pyo3(signature = (a, b, tol = DE_TOL))]
fn dynamically_equivalent(a: &PySystem, b: &PySystem, tol: f64) -> PyResult<bool> {
    equivalence::dynamically_equivalent(&a.inner, &b.inner, tol).map_err(err)
}

/// `(balanced, witness)`.
#[pyfunction]
fn is_complex_balanced(sys: &PySystem) -> PyResult<(bool, Option<Vec<f64>>)> {
    let r = balance::is_complex_balanced(&sys.inner, BALANCE_TOL).map_err(err)?;
    Ok((r.balanced, r.witness))
}

/// `(balanced, witness)`.
#[pyfunction]
fn is_detailed_balanced(sys: &PySystem) -> PyResult<(bool, Option<Vec<f64>>)> {
    let r = balance::is_detailed_balanced(&sys.inner, BALANCE_TOL).map_err(err)?;
    Ok((r.balanced, r.witness))
}

#[pyfunction]
fn tree_constants(sys: &PySystem) -> PyResult<Vec<f64>> {
    Ok(balance::tree_constants(&sys.inner).map_err(err)?.values)
}

/// Membership verdict as a dict with keys `verdict` (`"Member"`, `"NotMember"`
/// or `"Unknown"`), `steady_state`, `certificate` and `diagnostics`.
#[pyfunction]
#[pyo3(signature = (sys, steady_state = None, seed = 0, detailed = false))]
fn is_disguised_toric<'py>(
    py: Python<'py>,
    sys: &PySystem,
    steady_state: Option<Vec<f64>>,
    seed: u64,
    detailed: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = MembershipOptions { steady_state, seed };
    let r = if detailed {
        equivalence::is_disguised_detailed_balanced(&sys.inner, &opts)
    } else {
        equivalence::is_disguised_toric(&sys.inner, &opts)
    }
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{:?}", r.verdict))?;
    d.set_item("steady_state", r.steady_state)?;
    d.set_item("certificate", r.realization.map(|inner| PySystem { inner }))?;
    d.set_item("diagnostics", r.diagnostics)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (sys, matrix, offset = None))]
fn apply_affine(sys: &PySystem, matrix: Vec<Vec<f64>>, offset: Option<Vec<f64>>) -> PyResult<PySystem> {
    let m = square(matrix)?;
    let b = offset.unwrap_or_else(|| vec![0.0; m.nrows()]);
    let a = AffineMap::new(m, b).map_err(err)?;
    Ok(PySystem { inner: transforms::apply_affine(&a, &sys.inner).map_err(err)? })
}

#[pyfunction]
fn apply_projective(sys: &PySystem, coefficients: Vec<Vec<f64>>) -> PyResult<PySystem> {
    let p = ProjectiveMap::new(square(coefficients)?).map_err(err)?;
    Ok(PySystem { inner: transforms::apply_projective(&p, &sys.inner).map_err(err)? })
}

#[pyfunction]
fn is_endotactic(sys: &PySystem) -> PyResult<bool> {
    geometry::is_endotactic(sys.inner.network()).map_err(err)
}

#[pyfunction]
fn is_strongly_endotactic(sys: &PySystem) -> PyResult<bool> {
    geometry::is_strongly_endotactic(sys.inner.network()).map_err(err)
}

/// Positive steady states, optionally restricted to the class of `x0`.
#[pyfunction]
#[pyo3(signature = (sys, x0 = None, seed = 0))]
fn steady_states(sys: &PySystem, x0: Option<Vec<f64>>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let opts = SteadyStateOptions { seed, ..Default::default() };
    let report = match x0 {
        Some(x0) => dynamics::steady_states_in_class(&sys.inner, &x0, &opts).map_err(err)?,
        None => dynamics::find_steady_states(&sys.inner, &opts),
    };
    Ok(report.states.into_iter().map(|s| s.x).collect())
}

/// `(times, states, status)`.
#[pyfunction]
#[pyo3(signature = (sys, x0, t_end, rtol = None, atol = None))]
fn integrate(
    sys: &PySystem,
    x0: Vec<f64>,
    t_end: f64,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, String)> {
    let mut opts = IntegrateOptions::default();
    opts.rtol = rtol.unwrap_or(opts.rtol);
    opts.atol = atol.unwrap_or(opts.atol);
    let t = dynamics::integrate(&sys.inner, &x0, t_end, &opts).map_err(err)?;
    Ok((t.times, t.states, format!("{:?}", t.status)))
}

#[pyfunction]
fn detect_limit_cycle(sys: &PySystem, x0: Vec<f64>) -> PyResult<String> {
    let r = dynamics::detect_limit_cycle(&sys.inner, &x0, &LimitCycleOptions::default()).map_err(err)?;
    Ok(format!("{:?}", r.verdict))
}

#[pymodule]
fn crn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add("FIXTURES", fixtures::NAMES.to_vec())?;
    m.add_function(wrap_pyfunction!(dynamically_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(is_complex_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(is_detailed_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(tree_constants, m)?)?;
    m.add_function(wrap_pyfunction!(is_disguised_toric, m)?)?;
    m.add_function(wrap_pyfunction!(apply_affine, m)?)?;
    m.add_function(wrap_pyfunction!(apply_projective, m)?)?;
    m.add_function(wrap_pyfunction!(is_endotactic, m)?)?;
    m.add_function(wrap_pyfunction!(is_strongly_endotactic, m)?)?;
    m.add_function(wrap_pyfunction!(steady_states, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_limit_cycle, m)?)?;
    Ok(())
}
