//! Python bindings: surfaces, discs, the disc solver and 2-jet reconstruction.

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stadisc::conormal::{maslov_of_disc, FibrationEquations};
use stadisc::jetdet::reconstruct_polymap;
use stadisc::quadric::{build_disc_star, ClosedFormOptions, StarDiscParams};
use stadisc::scaling::{dilate_defining, to_normal_form};
use stadisc::solver::{solve_disc, solve_from_quadric, DiscConstraint, SolveOptions, SolveReport};
use stadisc::{ComplexPoint, DefiningPolynomial, DiscJson, HermitianForm, LiftedDisc, NormalFormSurface, PolyMap, PolyMapJson, C64};

create_exception!(stadisc_py, NumericalError, PyRuntimeError, "Divergence, under-resolution or another numerical failure.");

fn to_py(e: stadisc::Error) -> PyErr {
    use stadisc::Error::*;
    match e {
        Divergence { .. }
        | UnderResolved(_)
        | ContinuationFailure { .. }
        | DegenerateFibration { .. }
        | SingularDifferential { .. }
        | NotOnFibration(_)
        | NormalMisalignment(_)
        | Domain { .. } => NumericalError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn form(rows: Vec<Vec<C64>>) -> PyResult<HermitianForm> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("form must be a square matrix"));
    }
    HermitianForm::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).map_err(to_py)
}

fn point(z: Vec<C64>) -> PyResult<ComplexPoint> {
    ComplexPoint::new(z).map_err(to_py)
}

/// A real hypersurface in normal form at the origin.
#[pyclass(name = "Surface", module = "stadisc_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Surface {
    inner: NormalFormSurface,
}

#[pymethods]
impl Surface {
    /// The hyperquadric `x0 = t(conj z) A z` for the Hermitian matrix `a`.
    #[staticmethod]
    fn quadric(a: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self { inner: NormalFormSurface::quadric(form(a)?) })
    }

    /// From a defining polynomial in JSON, already in normal form.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let rho: DefiningPolynomial = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self { inner: NormalFormSurface::from_defining(&rho).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.defining_polynomial()).expect("serializable")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn is_quadric(&self) -> bool {
        self.inner.is_quadric()
    }

    /// The defining function at `z`.
    fn value(&self, z: Vec<C64>) -> PyResult<f64> {
        if z.len() != self.inner.n() + 1 {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.n() + 1)));
        }
        Ok(self.inner.calculus().value(&z))
    }

    fn dilate(&self, t: f64) -> PyResult<Self> {
        Ok(Self { inner: dilate_defining(&self.inner, t).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Surface(n={}, terms={})", self.inner.n(), self.inner.defining_polynomial().len())
    }
}

/// A disc with its conormal lift, stored as Fourier coefficients.
#[pyclass(name = "Disc", module = "stadisc_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Disc {
    inner: LiftedDisc,
}

#[pymethods]
impl Disc {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let j: DiscJson = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self { inner: LiftedDisc::from_json(&j).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("serializable")
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples()
    }

    fn center(&self) -> Vec<C64> {
        self.inner.center().into_coords()
    }

    /// `f` on the boundary grid, one row per sample.
    fn boundary(&self) -> Vec<Vec<C64>> {
        self.inner.f_samples().to_vec()
    }

    /// The lift `g` on the boundary grid.
    fn lift(&self) -> Vec<Vec<C64>> {
        self.inner.g_samples().to_vec()
    }

    fn boundary_jet<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let bj = self.inner.boundary_jet();
        let d = PyDict::new(py);
        d.set_item("f1", bj.f1)?;
        d.set_item("df1", bj.df1)?;
        d.set_item("g1", bj.g1)?;
        d.set_item("dg1", bj.dg1)?;
        Ok(d)
    }

    fn tail_estimate(&self) -> f64 {
        self.inner.tail_estimate()
    }

    fn __repr__(&self) -> String {
        format!("Disc(n={}, modes={}, samples={})", self.inner.n(), self.inner.modes(), self.inner.samples())
    }
}

fn report<'py>(py: Python<'py>, r: &SolveReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("converged", r.converged)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("boundary_residual", r.boundary_residual)?;
    d.set_item("constraint_residual", r.constraint_residual)?;
    d.set_item("tail", r.tail)?;
    d.set_item("verification_residual", r.verification_residual)?;
    d.set_item("distance_from_guess", r.distance_from_guess)?;
    d.set_item("history", r.history.clone())?;
    Ok(d)
}

/// Closed-form star disc of the quadric with form `a`, parameter `alpha` and direction `v`.
#[pyfunction]
#[pyo3(signature = (a, alpha, v, modes = 32, samples = 256))]
fn star_disc(a: Vec<Vec<C64>>, alpha: C64, v: Vec<C64>, modes: usize, samples: usize) -> PyResult<Disc> {
    let p = StarDiscParams { a: alpha, v };
    let inner = build_disc_star(&p, &form(a)?, ClosedFormOptions { modes, samples }).map_err(to_py)?;
    Ok(Disc { inner })
}

fn solve<'py>(
    py: Python<'py>,
    surface: &Surface,
    constraint: DiscConstraint,
    guess: Option<&Disc>,
    opts: SolveOptions,
) -> PyResult<(Disc, Bound<'py, PyDict>)> {
    let (d, r) = py
        .detach(|| match guess {
            Some(g) => solve_disc(&surface.inner, &constraint, &g.inner, &opts),
            None => solve_from_quadric(&surface.inner, &constraint, &opts),
        })
        .map_err(to_py)?;
    Ok((Disc { inner: d }, report(py, &r)?))
}

fn options(modes: usize, tol: f64, max_modes: Option<usize>) -> SolveOptions {
    SolveOptions { modes, tol, max_modes, ..SolveOptions::default() }
}

/// The disc attached to `surface` with the given center; returns the disc and a solve report.
#[pyfunction]
#[pyo3(signature = (surface, center, guess = None, modes = 32, tol = 1e-10, max_modes = None))]
fn solve_center<'py>(
    py: Python<'py>,
    surface: &Surface,
    center: Vec<C64>,
    guess: Option<&Disc>,
    modes: usize,
    tol: f64,
    max_modes: Option<usize>,
) -> PyResult<(Disc, Bound<'py, PyDict>)> {
    solve(py, surface, DiscConstraint::center(point(center)?), guess, options(modes, tol, max_modes))
}

/// The disc attached to `surface` with boundary jet `(w_alpha, s0)` at 1.
#[pyfunction]
#[pyo3(signature = (surface, w_alpha, s0, guess = None, modes = 32, tol = 1e-10, max_modes = None))]
#[allow(clippy::too_many_arguments)]
fn solve_jet<'py>(
    py: Python<'py>,
    surface: &Surface,
    w_alpha: Vec<C64>,
    s0: C64,
    guess: Option<&Disc>,
    modes: usize,
    tol: f64,
    max_modes: Option<usize>,
) -> PyResult<(Disc, Bound<'py, PyDict>)> {
    solve(py, surface, DiscConstraint::jet(w_alpha, s0), guess, options(modes, tol, max_modes))
}

#[pyfunction]
fn maslov_index(surface: &Surface, disc: &Disc) -> PyResult<i64> {
    maslov_of_disc(&FibrationEquations::new(&surface.inner), &disc.inner).map_err(to_py)
}

/// Normal form at `base` of the surface given by a defining polynomial in JSON.
#[pyfunction]
fn normal_form<'py>(py: Python<'py>, rho_json: &str, base: Vec<C64>) -> PyResult<(Surface, Bound<'py, PyDict>)> {
    let rho: DefiningPolynomial = serde_json::from_str(rho_json).map_err(json_err)?;
    let (s, rec) = to_normal_form(&rho, &point(base)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("pivot", rec.pivot)?;
    d.set_item("truncation_residual", rec.truncation_residual)?;
    d.set_item("phi", serde_json::to_string(&rec.phi.to_json()).expect("serializable"))?;
    d.set_item("phi_inv", serde_json::to_string(&rec.phi_inv.to_json()).expect("serializable"))?;
    Ok((Surface { inner: s }, d))
}

/// Values at `points` of the map rebuilt from its 2-jet at 0 through stationary discs.
#[pyfunction]
#[pyo3(signature = (map_json, source, points, target = None, modes = 32))]
fn reconstruct(py: Python<'_>, map_json: &str, source: &Surface, points: Vec<Vec<C64>>, target: Option<&Surface>, modes: usize) -> PyResult<Vec<Vec<C64>>> {
    let j: PolyMapJson = serde_json::from_str(map_json).map_err(json_err)?;
    let map = PolyMap::from_json(&j).map_err(to_py)?;
    let pts = points.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
    let target = target.unwrap_or(source);
    let opts = SolveOptions { modes, ..SolveOptions::default() };
    let out = py.detach(|| reconstruct_polymap(&map, &source.inner, &target.inner, &pts, &opts)).map_err(to_py)?;
    Ok(out.into_iter().map(ComplexPoint::into_coords).collect())
}

/// Runs one acceptance criterion; returns `(passed, line)`.
#[pyfunction]
#[pyo3(signature = (id, seed = 0))]
fn acceptance(py: Python<'_>, id: u32, seed: u64) -> PyResult<(bool, String)> {
    if id == 0 || id as usize > stadisc::acceptance::TITLES.len() {
        return Err(PyValueError::new_err(format!("no criterion {id}")));
    }
    let o = py.detach(|| stadisc::acceptance::run(id, seed));
    Ok((o.passed, o.to_string()))
}

#[pymodule]
pub fn stadisc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", stadisc::VERSION)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<Surface>()?;
    m.add_class::<Disc>()?;
    m.add_function(wrap_pyfunction!(star_disc, m)?)?;
    m.add_function(wrap_pyfunction!(solve_center, m)?)?;
    m.add_function(wrap_pyfunction!(solve_jet, m)?)?;
    m.add_function(wrap_pyfunction!(maslov_index, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance, m)?)?;
    Ok(())
}
