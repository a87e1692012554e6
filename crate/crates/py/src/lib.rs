//! Python bindings: `import leapgrad`.

use std::cell::RefCell;

use leapgrad_core as core;
use leapgrad_core::analytic::CatalogFunction;
use leapgrad_core::bench::{Competitor, ExperimentConfig, RootSampling};
use leapgrad_core::{Complex64, Error, Interval, LgaConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv { .. } => PyOSError::new_err(e.to_string()),
        Error::DeflateConstant
        | Error::RootsNotConverged { .. }
        | Error::NonFinite { .. }
        | Error::OrderNotFound { .. }
        | Error::StepSelectionFailed { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn interval(a: f64, b: f64) -> PyResult<Interval> {
    Interval::new(a, b).map_err(to_py)
}

/// Dense real polynomial with ascending coefficients.
#[pyclass(name = "Polynomial", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPolynomial(core::Polynomial);

#[pymethods]
impl PyPolynomial {
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        core::Polynomial::new(coeffs).map(Self).map_err(to_py)
    }

    /// Parses space-separated ascending coefficients.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(to_py)
    }

    /// Monic polynomial with the given conjugate-closed roots.
    #[staticmethod]
    fn from_roots(roots: Vec<Complex64>) -> PyResult<Self> {
        core::Polynomial::from_roots(&roots).map(Self).map_err(to_py)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn derivative(&self) -> Self {
        Self(self.0.derivative())
    }

    /// Quotient `q` with `p(x) = p(xk) + (x - xk) q(x)`.
    fn deflate(&self, xk: f64) -> PyResult<Self> {
        self.0.deflate(xk).map(Self).map_err(to_py)
    }

    fn roots(&self) -> PyResult<Vec<Complex64>> {
        self.0.roots().map_err(to_py)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial([{}])", self.0.to_string().replace(' ', ", "))
    }
}

#[pyclass(name = "MinResult", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMinResult {
    x_arg: f64,
    value: f64,
    leaps: usize,
    evals: usize,
    converged: bool,
}

#[pymethods]
impl PyMinResult {
    fn __repr__(&self) -> String {
        format!(
            "MinResult(x_arg={}, value={}, leaps={}, evals={}, converged={})",
            self.x_arg,
            self.value,
            self.leaps,
            self.evals,
            if self.converged { "True" } else { "False" }
        )
    }
}

impl From<core::MinResult> for PyMinResult {
    fn from(r: core::MinResult) -> Self {
        Self {
            x_arg: r.x_arg,
            value: r.value,
            leaps: r.leaps,
            evals: r.evals,
            converged: r.converged,
        }
    }
}

#[pyclass(name = "AnalyticResult", frozen, get_all)]
struct PyAnalyticResult {
    x_arg: f64,
    value: f64,
    order: usize,
    step: f64,
    epsilon: f64,
    stabilized: bool,
    surrogate: PyPolynomial,
}

/// A `Polynomial` is evaluated natively; anything else is called from Rust
/// and the first Python exception is re-raised after the search.
struct Objective<'py> {
    poly: Option<core::Polynomial>,
    callable: Bound<'py, PyAny>,
    error: RefCell<Option<PyErr>>,
}

impl<'py> Objective<'py> {
    fn new(f: Bound<'py, PyAny>) -> Self {
        let poly = f.cast::<PyPolynomial>().ok().map(|p| p.get().0.clone());
        Self {
            poly,
            callable: f,
            error: RefCell::new(None),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        if let Some(p) = &self.poly {
            return p.eval(x);
        }
        if self.error.borrow().is_some() {
            return f64::NAN;
        }
        match self.callable.call1((x,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *self.error.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, r: core::Result<T>) -> PyResult<T> {
        if let Some(e) = self.error.into_inner() {
            return Err(e);
        }
        r.map_err(to_py)
    }
}

/// Leap gradient minimum of a polynomial on `[a, b]`.
#[pyfunction]
#[pyo3(signature = (p, a = -1.0, b = 1.0, h = 1e-4))]
fn lga_poly_min(p: &PyPolynomial, a: f64, b: f64, h: f64) -> PyResult<PyMinResult> {
    core::lga_poly_min(&p.0, interval(a, b)?, h)
        .map(Into::into)
        .map_err(to_py)
}

/// Leap gradient minimum of any callable `f(x) -> float` on `[a, b]`.
#[pyfunction]
#[pyo3(signature = (f, a = -1.0, b = 1.0, h = 1e-4, max_depth = 8, fallback_grid = 1024))]
fn lga_generic(
    f: Bound<'_, PyAny>,
    a: f64,
    b: f64,
    h: f64,
    max_depth: usize,
    fallback_grid: usize,
) -> PyResult<PyMinResult> {
    let cfg = LgaConfig {
        h,
        max_depth,
        fallback_grid,
    };
    let obj = Objective::new(f);
    let r = core::lga_generic(|x| obj.eval(x), interval(a, b)?, &cfg);
    obj.finish(r).map(Into::into)
}

/// Best of `n + 1` equally spaced samples.
#[pyfunction]
#[pyo3(signature = (f, a = -1.0, b = 1.0, n = 20_000))]
fn bfs_min(f: Bound<'_, PyAny>, a: f64, b: f64, n: usize) -> PyResult<PyMinResult> {
    let obj = Objective::new(f);
    let r = core::competitors::bfs_min(|x| obj.eval(x), interval(a, b)?, n);
    obj.finish(r).map(Into::into)
}

/// Minimum over the real critical points and the endpoints.
#[pyfunction]
#[pyo3(signature = (p, a = -1.0, b = 1.0))]
fn zdm_min(p: &PyPolynomial, a: f64, b: f64) -> PyResult<PyMinResult> {
    core::competitors::zdm_min(&p.0, interval(a, b)?)
        .map(Into::into)
        .map_err(to_py)
}

/// Piyavskii-Shubert search. `lipschitz=None` uses a grid estimate.
#[pyfunction]
#[pyo3(signature = (f, a = -1.0, b = 1.0, lipschitz = None, tol = 1e-6, max_iter = 1_000_000))]
fn psm_min(
    f: Bound<'_, PyAny>,
    a: f64,
    b: f64,
    lipschitz: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> PyResult<PyMinResult> {
    let iv = interval(a, b)?;
    let obj = Objective::new(f);
    let r = match lipschitz {
        Some(l) => Ok(l),
        None => core::competitors::estimate_lipschitz(|x| obj.eval(x), iv, core::bench::LIPSCHITZ_GRID)
            .map(|l| l.max(core::bench::LIPSCHITZ_FLOOR)),
    }
    .and_then(|l| core::competitors::psm_min(|x| obj.eval(x), l, iv, tol, max_iter));
    obj.finish(r).map(Into::into)
}

#[pyfunction]
#[pyo3(signature = (f, a = -1.0, b = 1.0, n = 1000))]
fn estimate_lipschitz(f: Bound<'_, PyAny>, a: f64, b: f64, n: usize) -> PyResult<f64> {
    let obj = Objective::new(f);
    let r = core::competitors::estimate_lipschitz(|x| obj.eval(x), interval(a, b)?, n);
    obj.finish(r)
}

/// Minimizes a catalog function (`exp`, `sin3x`, `rational`) on `[-1, 1]`.
#[pyfunction]
#[pyo3(signature = (name, eps = 1e-3, walk_step = 1e-4))]
fn analytic_min(name: &str, eps: f64, walk_step: f64) -> PyResult<PyAnalyticResult> {
    let c: CatalogFunction = name.parse().map_err(to_py)?;
    let r = core::analytic::analytic_min(|x| c.eval(x), &c.bounds(), eps, walk_step)
        .map_err(to_py)?;
    Ok(PyAnalyticResult {
        x_arg: r.result.x_arg,
        value: r.result.value,
        order: r.surrogate.order,
        step: r.surrogate.step,
        epsilon: r.surrogate.epsilon,
        stabilized: r.step.stabilized,
        surrogate: PyPolynomial(r.surrogate.poly),
    })
}

/// Monic degree-`n` polynomial with roots in `[-1, b_param] x [-1, 1]`,
/// drawn from the stream of cell `(seed, n, trial)`.
#[pyfunction]
#[pyo3(signature = (n, b_param, seed, trial = 0, roots = "complex"))]
fn random_polynomial(n: usize, b_param: f64, seed: u64, trial: usize, roots: &str) -> PyResult<PyPolynomial> {
    let mode: RootSampling = roots.parse().map_err(to_py)?;
    let mut rng = core::bench::trial_rng(seed, n, trial);
    core::bench::random_polynomial(n, b_param, &mut rng, mode)
        .map(PyPolynomial)
        .map_err(to_py)
}

/// Runs the timing protocol. Returns `(degree, t_lga_us, t_competitor_us,
/// excluded)` per degree.
#[pyfunction]
#[pyo3(signature = (degrees, trials = 50, b_param = 1.0, competitor = "bfs", seed = 0, h = 1e-4))]
fn run_experiment(
    py: Python<'_>,
    degrees: Vec<usize>,
    trials: usize,
    b_param: f64,
    competitor: &str,
    seed: u64,
    h: f64,
) -> PyResult<Vec<(usize, f64, f64, usize)>> {
    let cfg = ExperimentConfig {
        degrees,
        trials,
        b_param,
        h,
        seed,
        competitor: competitor.parse::<Competitor>().map_err(to_py)?,
        ..ExperimentConfig::default()
    };
    let exp = py
        .detach(|| core::bench::run_experiment(&cfg))
        .map_err(to_py)?;
    Ok(exp
        .rows
        .iter()
        .map(|r| (r.degree, r.t_lga_us, r.t_competitor_us, r.excluded))
        .collect())
}

#[pymodule]
fn leapgrad(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolynomial>()?;
    m.add_class::<PyMinResult>()?;
    m.add_class::<PyAnalyticResult>()?;
    m.add_function(wrap_pyfunction!(lga_poly_min, m)?)?;
    m.add_function(wrap_pyfunction!(lga_generic, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_min, m)?)?;
    m.add_function(wrap_pyfunction!(zdm_min, m)?)?;
    m.add_function(wrap_pyfunction!(psm_min, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_lipschitz, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_min, m)?)?;
    m.add_function(wrap_pyfunction!(random_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
