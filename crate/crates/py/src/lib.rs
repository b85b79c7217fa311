//! Python bindings: build meshes, pick a benchmark case, solve it and read
//! back errors, coefficients and solver statistics.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pdfem::analysis::{conservation_residual, convergence_rates, error_norms, export_vtk, nodal_range};
use pdfem::assembly::Variant;
use pdfem::linsolve::Backend;
use pdfem::mesh::{build_structured_rect_with, Diagonal};
use pdfem::problems::{by_name, ExampleCase};
use pdfem::verify::{run_suite, StandardQuadrature};
use pdfem::{solve_case, MixedSolution, SolveOptions};

fn to_py(e: pdfem::Error) -> PyErr {
    if e.is_configuration() {
        PyValueError::new_err(e.to_string())
    } else if matches!(e, pdfem::Error::Io { .. }) {
        PyOSError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Triangulation of a planar polygon.
#[pyclass(name = "Mesh", frozen)]
struct PyMesh {
    inner: Arc<pdfem::Mesh>,
}

#[pymethods]
impl PyMesh {
    /// `nx × ny` rectangles on `[xmin, xmax] × [ymin, ymax]`, each cut in two.
    #[staticmethod]
    #[pyo3(signature = (nx, ny, xmin=0.0, xmax=1.0, ymin=0.0, ymax=1.0, diagonal="right"))]
    fn rectangle(nx: usize, ny: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64, diagonal: &str) -> PyResult<Self> {
        let d = Diagonal::parse(diagonal).map_err(to_py)?;
        let m = build_structured_rect_with(nx, ny, xmin, xmax, ymin, ymax, d).map_err(to_py)?;
        Ok(PyMesh { inner: Arc::new(m) })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_faces(&self) -> usize {
        self.inner.n_faces()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn h_max(&self) -> f64 {
        self.inner.h_max()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|v| (v[0], v[1])).collect()
    }

    fn cells(&self) -> Vec<[usize; 3]> {
        self.inner.cells().to_vec()
    }

    fn refine(&self) -> PyResult<Self> {
        Ok(PyMesh { inner: Arc::new(self.inner.refine_uniform().map_err(to_py)?) })
    }

    fn __repr__(&self) -> String {
        format!("Mesh(vertices={}, cells={})", self.inner.n_vertices(), self.inner.n_cells())
    }
}

/// A benchmark problem: data, domain, boundary tags and exact fields.
#[pyclass(name = "Case", frozen)]
struct PyCase {
    inner: ExampleCase,
}

#[pymethods]
impl PyCase {
    /// `name` is one of ex1, ex2, ex3, ex4, poly.
    #[new]
    #[pyo3(signature = (name, epsilon=None, delta=None, order=1, variant="standard", gamma=None, p=None, diagonal=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        epsilon: Option<f64>,
        delta: Option<f64>,
        order: usize,
        variant: &str,
        gamma: Option<f64>,
        p: Option<f64>,
        diagonal: Option<&str>,
    ) -> PyResult<Self> {
        let variant = Variant::parse(variant).map_err(to_py)?;
        let mut case = by_name(name, epsilon, delta, order)
            .and_then(|c| c.with_variant(variant))
            .map_err(to_py)?;
        if let Some(g) = gamma {
            case.problem.gamma = g;
        }
        if let Some(p) = p {
            case.problem.p_exp = p;
        }
        if let Some(d) = diagonal {
            case = case.with_diagonal(Diagonal::parse(d).map_err(to_py)?);
        }
        Ok(PyCase { inner: case })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.problem.variant.name()
    }

    #[getter]
    fn has_exact(&self) -> bool {
        self.inner.exact.is_some()
    }

    fn mesh(&self, n: usize) -> PyResult<PyMesh> {
        Ok(PyMesh { inner: Arc::new(self.inner.build_mesh(n).map_err(to_py)?) })
    }

    /// Exact `u` at `(x, y)`, or `None` without an exact solution.
    fn exact_u(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.exact.as_ref().map(|e| (e.u)(pdfem::Vec2::new(x, y)))
    }

    fn __repr__(&self) -> String {
        format!("Case({}, variant={})", self.inner.id, self.inner.problem.variant.name())
    }
}

/// Discrete `(u_h, p_h, z_h)` together with the case it solves.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    inner: MixedSolution,
    case: ExampleCase,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.coeffs.clone()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.coeffs.clone()
    }

    #[getter]
    fn z(&self) -> Vec<f64> {
        self.inner.z.coeffs.clone()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// Sizes, timings and solver diagnostics.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let s = &self.inner.stats;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("n_cells", s.n_cells)?;
        d.set_item("n_dofs", s.n_dofs)?;
        d.set_item("n_free", s.n_free)?;
        d.set_item("assembly_secs", s.assembly_secs)?;
        d.set_item("solve_secs", s.solve_secs)?;
        d.set_item("residual", s.residual)?;
        d.set_item("backend", s.backend.name())?;
        d.set_item("iterations", s.iterations)?;
        Ok(d)
    }

    /// Error norms; entries needing an exact solution are `None` without one.
    #[pyo3(signature = (quad_degree=None))]
    fn errors<'py>(&self, py: Python<'py>, quad_degree: Option<usize>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let r = error_norms(&self.inner, &self.case, quad_degree).map_err(to_py)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("l2_u", r.l2_u)?;
        d.set_item("h1_u", r.h1_u)?;
        d.set_item("h1_semi_u", r.h1_semi_u)?;
        d.set_item("l2_p", r.l2_p)?;
        d.set_item("div_p", r.div_p)?;
        d.set_item("streamline", r.streamline)?;
        d.set_item("triple_norm", r.triple_norm)?;
        d.set_item("l2_z", r.l2_z)?;
        d.set_item("z_broken", r.z_broken)?;
        Ok(d)
    }

    /// Largest elementwise constraint moment relative to the data scale.
    fn conservation(&self) -> PyResult<f64> {
        Ok(conservation_residual(&self.inner, &self.case.problem).map_err(to_py)?.relative())
    }

    /// Smallest and largest nodal value of `u_h`.
    fn u_range(&self) -> (f64, f64) {
        nodal_range(&self.inner.u)
    }

    fn write_vtk(&self, path: PathBuf) -> PyResult<()> {
        export_vtk(&self.inner, &path).map_err(to_py)
    }
}

/// Solves `case` on its mesh with `n` cells per unit length.
#[pyfunction]
#[pyo3(signature = (case, n, order=1, solver=None, deterministic=false, quad_degree=None))]
fn solve(
    py: Python<'_>,
    case: &PyCase,
    n: usize,
    order: usize,
    solver: Option<&str>,
    deterministic: bool,
    quad_degree: Option<usize>,
) -> PyResult<PySolution> {
    let mut opts = SolveOptions::order(order);
    opts.backend = solver.map(Backend::parse).transpose().map_err(to_py)?;
    opts.deterministic = deterministic;
    opts.assembly.quad_degree = quad_degree;
    let case = case.inner.clone();
    let sol = py.detach(|| solve_case(&case, n, &opts)).map_err(to_py)?;
    Ok(PySolution { inner: sol, case })
}

/// `log2(e[i-1] / e[i])`, with `None` first.
#[pyfunction]
fn rates(errors: Vec<f64>) -> Vec<Option<f64>> {
    convergence_rates(&errors)
}

/// Runs the built-in property suite; returns `(name, passed, detail)` rows.
#[pyfunction]
fn verify(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(|| run_suite(&StandardQuadrature))
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed, r.detail))
        .collect()
}

#[pymodule]
fn pdfem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyCase>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(rates, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
