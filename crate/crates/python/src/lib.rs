//! Python bindings. The extension module is named `simplex_reduce`.

use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use simplex_reduce::experiments::{
    centered_variance_nk, complexity_audit as audit, expected_nk, parse_rational, thresholds as thresholds_of,
    to_f64, variance_nk,
};
use simplex_reduce::geometry::{add_boundary_grid, binomial_process, poisson_process, rips_complex};
use simplex_reduce::homology::boundary_matrix;
use simplex_reduce::io as formats;
use simplex_reduce::reduction::{compute_degrees, compute_indices, verify_dominating as dominating, verify_nash as nash};
use simplex_reduce::{
    betti_numbers, Error, FieldChoice, Metric, PointConfiguration, ReduceOptions, ReductionReport, RipsParams,
    Simplex, SimplicialComplex, TorusSpec, VertexId,
};

fn to_py(e: Error) -> PyErr {
    if e.is_resource() {
        PyMemoryError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn simplex(ids: Vec<u32>) -> PyResult<Simplex> {
    Simplex::new(ids).map_err(to_py)
}

fn vertex_ids(ids: &[u32]) -> Vec<VertexId> {
    ids.iter().map(|v| VertexId(*v)).collect()
}

fn field(name: &str) -> PyResult<FieldChoice> {
    name.parse().map_err(to_py)
}

/// An abstract simplicial complex stored as the closure of its maximal simplices.
#[pyclass(name = "Complex", module = "simplex_reduce", skip_from_py_object)]
#[derive(Clone)]
pub struct PyComplex {
    inner: SimplicialComplex,
}

#[pymethods]
impl PyComplex {
    #[new]
    #[pyo3(signature = (maximal = None, cap = None))]
    fn new(maximal: Option<Vec<Vec<u32>>>, cap: Option<usize>) -> PyResult<Self> {
        let mut inner = cap.map_or_else(SimplicialComplex::new, SimplicialComplex::with_cap);
        for ids in maximal.unwrap_or_default() {
            inner.insert_maximal(&simplex(ids)?).map_err(to_py)?;
        }
        Ok(PyComplex { inner })
    }

    /// Parses the `ascomplex v1` text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyComplex { inner: formats::read_complex(text.as_bytes()).map_err(to_py)? })
    }

    fn to_text(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        formats::write_complex(&mut buf, &self.inner).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("the writer emits ascii"))
    }

    /// Inserts a simplex together with all its faces.
    fn insert(&mut self, ids: Vec<u32>) -> PyResult<()> {
        self.inner.insert_maximal(&simplex(ids)?).map_err(to_py)
    }

    /// Deletes a vertex and its star; returns the deleted simplices.
    fn remove_vertex(&mut self, v: u32) -> PyResult<Vec<Vec<u32>>> {
        let removal = self.inner.remove_vertex(VertexId(v)).map_err(to_py)?;
        Ok(removal.simplices.iter().map(Simplex::ids).collect())
    }

    fn vertices(&self) -> Vec<u32> {
        self.inner.vertices().map(|v| v.0).collect()
    }

    fn simplices(&self, dim: usize) -> Vec<Vec<u32>> {
        self.inner.simplices(dim).map(Simplex::ids).collect()
    }

    fn maximal_simplices(&self) -> Vec<Vec<u32>> {
        self.inner.maximal_simplices().iter().map(Simplex::ids).collect()
    }

    /// Number of simplices of each dimension.
    fn s_counts(&self) -> Vec<usize> {
        self.inner.s_counts()
    }

    /// Vertex count of the largest simplex.
    fn clique_number(&self) -> usize {
        self.inner.clique_number()
    }

    /// `beta_0 .. beta_{k0-1}` over `rational`, `gf2` or `gf<p>`.
    #[pyo3(signature = (k0 = 2, field = "rational"))]
    fn betti(&self, k0: usize, field: &str) -> PyResult<Vec<usize>> {
        Ok(betti_numbers(&self.inner, k0, self::field(field)?.validate().map_err(to_py)?).betti)
    }

    /// Dense boundary matrix from dimension `k` to `k - 1` in lexicographic order.
    fn boundary_matrix(&self, k: usize) -> Vec<Vec<i64>> {
        boundary_matrix(&self.inner, k).to_dense()
    }

    /// `(simplex, degree)` for every `k0`-simplex.
    fn degrees(&self, k0: usize) -> Vec<(Vec<u32>, usize)> {
        compute_degrees(&self.inner, k0).iter().map(|(s, d)| (s.ids(), d)).collect()
    }

    /// `(vertex, index)` for every vertex.
    fn indices(&self, k0: usize) -> Vec<(u32, i64)> {
        let degrees = compute_degrees(&self.inner, k0);
        compute_indices(&self.inner, &degrees).iter().map(|(v, i)| (v.0, i.as_i64())).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.num_vertices()
    }

    fn __contains__(&self, ids: Vec<u32>) -> bool {
        Simplex::new(ids).is_ok_and(|s| self.inner.contains(&s))
    }

    fn __eq__(&self, other: &PyComplex) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Complex(s_counts={:?})", self.inner.s_counts())
    }
}

/// Points on a flat torus or a square.
#[pyclass(name = "PointCloud", module = "simplex_reduce")]
pub struct PyPointCloud {
    inner: PointConfiguration,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    #[pyo3(signature = (points, d = 2, a = 1.0, metric = "uniform", square = false))]
    fn new(points: Vec<Vec<f64>>, d: usize, a: f64, metric: &str, square: bool) -> PyResult<Self> {
        let inner = PointConfiguration::new(torus(d, a, metric, square)?, points).map_err(to_py)?;
        Ok(PyPointCloud { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyPointCloud { inner: formats::read_points(text.as_bytes()).map_err(to_py)? })
    }

    fn to_text(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        formats::write_points(&mut buf, &self.inner).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("the writer emits utf-8"))
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points.clone()
    }

    #[getter]
    fn seed(&self) -> Option<u64> {
        self.inner.seed
    }

    fn distance(&self, i: usize, j: usize) -> PyResult<f64> {
        let p = &self.inner.points;
        if i >= p.len() || j >= p.len() {
            return Err(PyValueError::new_err("point index out of range"));
        }
        Ok(self.inner.torus.distance(&p[i], &p[j]))
    }

    /// Appends evenly spaced perimeter points and returns their ids.
    fn add_boundary(&mut self, step: f64) -> PyResult<Vec<u32>> {
        Ok(add_boundary_grid(&mut self.inner, step).map_err(to_py)?.iter().map(|v| v.0).collect())
    }

    #[pyo3(signature = (epsilon, max_dim = None, cap = None))]
    fn rips(&self, epsilon: f64, max_dim: Option<usize>, cap: Option<usize>) -> PyResult<PyComplex> {
        let mut params = RipsParams::new(epsilon);
        params.max_dim = max_dim;
        if let Some(cap) = cap {
            params.simplex_cap = cap;
        }
        Ok(PyComplex { inner: rips_complex(&self.inner, &params).map_err(to_py)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn torus(d: usize, a: f64, metric: &str, square: bool) -> PyResult<TorusSpec> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let t = if square { TorusSpec::square(d, a) } else { TorusSpec::new(d, a) }.map_err(to_py)?;
    Ok(t.with_metric(metric))
}

#[pyfunction]
#[pyo3(signature = (n, d = 2, a = 1.0, seed = 0, metric = "uniform", square = false))]
fn binomial_points(n: usize, d: usize, a: f64, seed: u64, metric: &str, square: bool) -> PyResult<PyPointCloud> {
    Ok(PyPointCloud { inner: binomial_process(torus(d, a, metric, square)?, n, seed) })
}

#[pyfunction]
#[pyo3(signature = (intensity, d = 2, a = 1.0, seed = 0, metric = "uniform", square = false))]
fn poisson_points(intensity: f64, d: usize, a: f64, seed: u64, metric: &str, square: bool) -> PyResult<PyPointCloud> {
    Ok(PyPointCloud { inner: poisson_process(torus(d, a, metric, square)?, intensity, seed).map_err(to_py)? })
}

/// Outcome of a reduction run.
#[pyclass(name = "Report", module = "simplex_reduce")]
pub struct PyReport {
    inner: ReductionReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn removed(&self) -> usize {
        self.inner.removed
    }

    /// `(lower, upper)` removal bounds from the initial index histogram.
    #[getter]
    fn bounds(&self) -> (usize, usize) {
        self.inner.bounds
    }

    #[getter]
    fn removal_order(&self) -> Vec<u32> {
        self.inner.removed_vertices().iter().map(|v| v.0).collect()
    }

    #[getter]
    fn rejected(&self) -> Vec<u32> {
        self.inner.rejected.iter().map(|v| v.0).collect()
    }

    #[getter]
    fn initial_betti(&self) -> Vec<usize> {
        self.inner.initial_betti.clone()
    }

    #[getter]
    fn final_betti(&self) -> Vec<usize> {
        self.inner.final_betti.clone()
    }

    #[getter]
    fn table_mismatches(&self) -> usize {
        self.inner.table_mismatches
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn final_complex(&self) -> PyComplex {
        PyComplex { inner: self.inner.final_complex.clone() }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyReport { inner: serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))? })
    }

    fn __repr__(&self) -> String {
        format!("Report(removed={}, bounds={:?}, final_betti={:?})", self.inner.removed, self.inner.bounds, self.inner.final_betti)
    }
}

/// Removes non-critical vertices while `beta_0 .. beta_{k0-1}` stay fixed.
#[pyfunction]
#[pyo3(signature = (complex, critical, k0, full_domain = false, seed = 0, field = "rational", verify_tables = false))]
fn reduce(
    py: Python<'_>,
    complex: &PyComplex,
    critical: Vec<u32>,
    k0: usize,
    full_domain: bool,
    seed: u64,
    field: &str,
    verify_tables: bool,
) -> PyResult<PyReport> {
    let options = ReduceOptions { full_domain, field: self::field(field)?, verify_tables };
    let critical = vertex_ids(&critical);
    let inner = py
        .detach(|| simplex_reduce::reduce(&complex.inner, &critical, k0, &options, seed))
        .map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pyfunction]
fn verify_nash(report: &PyReport, initial: &PyComplex) -> PyResult<bool> {
    nash(&report.inner, &initial.inner).map_err(to_py)
}

#[pyfunction]
fn verify_dominating(report: &PyReport, initial: &PyComplex) -> PyResult<bool> {
    dominating(&report.inner, &initial.inner).map_err(to_py)
}

/// `(measured, bound, passed)` for the operation counters of a run.
#[pyfunction]
fn complexity_audit(report: &PyReport, initial: &PyComplex) -> (u64, u128, bool) {
    let a = audit(&report.inner, &initial.inner);
    (a.measured, a.bound, a.passed)
}

/// Exact first and second moments of the `k`-simplex count; `theta` is a decimal or fraction string.
#[pyfunction]
fn simplex_count_moments<'py>(py: Python<'py>, n: u64, k: u32, d: u32, theta: &str) -> PyResult<Bound<'py, PyDict>> {
    let theta = parse_rational(theta).map_err(to_py)?;
    let e = expected_nk(n, k, d, &theta).map_err(to_py)?;
    let v = variance_nk(n, k, d, &theta).map_err(to_py)?;
    let c = centered_variance_nk(n, k, d, &theta).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("expected", to_f64(&e))?;
    out.set_item("expected_exact", e.to_string())?;
    out.set_item("variance_formula", to_f64(&v))?;
    out.set_item("variance_formula_exact", v.to_string())?;
    out.set_item("variance_centered", to_f64(&c))?;
    Ok(out)
}

/// Clique-number thresholds at `n`: `(theta_prime, theta, theta_next, valid)`.
#[pyfunction]
#[pyo3(signature = (n, k, d, eta = 1.0))]
fn thresholds(n: u64, k: u32, d: u32, eta: f64) -> PyResult<(f64, f64, f64, bool)> {
    let t = thresholds_of(n, k, d, eta).map_err(to_py)?;
    Ok((t.theta_prime, t.theta, t.theta_next, t.valid))
}

#[pymodule(name = "simplex_reduce")]
mod simplex_reduce_py {
    #[pymodule_export]
    use super::{
        binomial_points, complexity_audit, poisson_points, reduce, simplex_count_moments, thresholds, verify_dominating,
        verify_nash, PyComplex, PyPointCloud, PyReport,
    };
}
