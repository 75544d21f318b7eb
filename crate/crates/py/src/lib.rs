//! Python bindings: transgression forms, regulator cocycles, invariant
//! polynomials, the filtration classifier and the verification suites.

use std::sync::Arc;

use charclass::filtration::{parse_form, CoordSystem, LogMeroForm};
use charclass::invpoly;
use charclass::linalg::SqMat;
use charclass::matlie::CMat;
use charclass::regulator::{self, QuadratureConfig};
use charclass::weil::{transgress_gl, LieData, WeilAlgebra};
use charclass::{verify as suites, Error};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyComplex;

create_exception!(charclass_py, CharclassError, PyValueError);

fn err(e: Error) -> PyErr { CharclassError::new_err(e.to_string()) }

/// A square matrix from nested lists of numbers, or a bare number for 1×1.
fn to_cmat(obj: &Bound<'_, PyAny>) -> PyResult<CMat> {
  if obj.is_instance_of::<PyComplex>() || obj.extract::<f64>().is_ok() {
    return Ok(CMat::from_element(1, 1, obj.extract::<Complex64>()?));
  }
  let rows: Vec<Vec<Complex64>> = obj.extract()?;
  let n = rows.len();
  if n == 0 || rows.iter().any(|r| r.len() != n) {
    return Err(CharclassError::new_err("matrix must be square and non-empty"));
  }
  Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_tuple(objs: &Bound<'_, PyAny>) -> PyResult<Vec<CMat>> {
  objs.try_iter()?.map(|o| to_cmat(&o?)).collect()
}

fn config(order: usize, analytic: bool, diff_step: f64) -> PyResult<QuadratureConfig> {
  let cfg = QuadratureConfig { order, analytic_derivatives: analytic, diff_step, ..QuadratureConfig::default() };
  cfg.validate().map_err(err)?;
  Ok(cfg)
}

/// Value of a Chern–Simons or Borel cocycle.
#[pyclass(frozen, skip_from_py_object, module = "charclass_py")]
#[derive(Clone)]
struct RegulatorValue {
  #[pyo3(get)]
  raw:     Complex64,
  #[pyo3(get)]
  reduced: f64,
  #[pyo3(get)]
  p:       usize,
}

#[pymethods]
impl RegulatorValue {
  fn __repr__(&self) -> String { format!("RegulatorValue(p={}, raw={}, reduced={:.15e})", self.p, self.raw, self.reduced) }
}

impl From<regulator::RegulatorValue> for RegulatorValue {
  fn from(v: regulator::RegulatorValue) -> Self { Self { raw: v.raw, reduced: v.reduced, p: v.p } }
}

/// Exact transgression `T_p` for `(gl_n, u_n)` as a JSON string.
#[pyfunction]
fn transgress(py: Python<'_>, n: usize, p: usize) -> PyResult<String> {
  let r = py.detach(|| transgress_gl(n, p)).map_err(err)?;
  let w = WeilAlgebra::new(LieData::gl(n));
  let doc = serde_json::json!({
    "n": n,
    "p": p,
    "basis": w.lie.basis_labels,
    "t": r.t.to_export(),
    "q": r.q.to_export(),
    "closed_basic_dimension": r.closed_dim,
    "residual_zero": w.d(&r.t).sub(&r.q).is_zero(),
  });
  Ok(serde_json::to_string_pretty(&doc).expect("plain data"))
}

#[pyfunction]
#[pyo3(signature = (n, p, tuple, order = 16, analytic = false, diff_step = 1e-6))]
fn cs_cocycle(py: Python<'_>, n: usize, p: usize, tuple: &Bound<'_, PyAny>, order: usize, analytic: bool, diff_step: f64) -> PyResult<RegulatorValue> {
  let cfg = config(order, analytic, diff_step)?;
  let tuple = to_tuple(tuple)?;
  Ok(py.detach(|| regulator::cs_cocycle(n, p, &tuple, &cfg)).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (n, p, tuple, order = 16, analytic = false, diff_step = 1e-6))]
fn borel_cocycle(py: Python<'_>, n: usize, p: usize, tuple: &Bound<'_, PyAny>, order: usize, analytic: bool, diff_step: f64) -> PyResult<RegulatorValue> {
  let cfg = config(order, analytic, diff_step)?;
  let tuple = to_tuple(tuple)?;
  Ok(py.detach(|| regulator::borel_cocycle(n, p, &tuple, &cfg)).map_err(err)?.into())
}

/// `|δf|` for the cocycle of degree `2p - 1` on a tuple of `2p + 1` matrices.
#[pyfunction]
#[pyo3(signature = (n, p, tuple, order = 16, analytic = false, diff_step = 1e-6))]
fn cocycle_residual(py: Python<'_>, n: usize, p: usize, tuple: &Bound<'_, PyAny>, order: usize, analytic: bool, diff_step: f64) -> PyResult<f64> {
  let cfg = config(order, analytic, diff_step)?;
  let tuple = to_tuple(tuple)?;
  let residual = py.detach(|| regulator::coboundary_of_integral(&*regulator::transgression_form(n, p)?, &tuple, &cfg));
  Ok(residual.map_err(err)?.norm())
}

/// `C_k(A)`, the coefficient of `t^{n-k}` in `det(tI - A)`.
#[pyfunction]
fn chern_poly(k: usize, matrix: &Bound<'_, PyAny>) -> PyResult<Complex64> {
  let m = to_cmat(matrix)?;
  let n = m.nrows();
  let a = SqMat::from_fn(n, |i, j| m[(i, j)]);
  invpoly::chern_poly(n, k, &a).map_err(err)
}

/// Runs a verification suite and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 7))]
fn verify(py: Python<'_>, suite: &str, seed: u64) -> PyResult<String> {
  let report = py.detach(|| suites::run(suite, seed)).map_err(err)?;
  Ok(report.to_json())
}

/// A meromorphic form with poles along the boundary coordinates.
#[pyclass(frozen, skip_from_py_object, module = "charclass_py", name = "LogMeroForm")]
#[derive(Clone)]
struct PyLogMeroForm(LogMeroForm);

#[pymethods]
impl PyLogMeroForm {
  #[new]
  #[pyo3(signature = (expr, boundary, interior = Vec::new()))]
  fn new(expr: &str, boundary: Vec<String>, interior: Vec<String>) -> PyResult<Self> {
    let b: Vec<&str> = boundary.iter().map(String::as_str).collect();
    let i: Vec<&str> = interior.iter().map(String::as_str).collect();
    let coords = Arc::new(CoordSystem::new(&b, &i).map_err(err)?);
    Ok(Self(parse_form(expr, &coords).map_err(err)?))
  }

  fn q_level(&self) -> Option<u32> { self.0.q_level() }

  fn f_level(&self) -> Option<i64> { self.0.f_level() }

  fn is_log(&self) -> bool { self.0.is_log() }

  fn classify(&self) -> String { self.0.classify() }

  fn d(&self) -> Self { Self(self.0.d()) }

  fn wedge(&self, other: &Self) -> PyResult<Self> { Ok(Self(self.0.wedge(&other.0).map_err(err)?)) }

  fn restrict_diagonal(&self, v1: &str, v2: &str, new_var: &str) -> PyResult<Self> {
    Ok(Self(self.0.restrict_diagonal(v1, v2, new_var).map_err(err)?))
  }

  fn __add__(&self, other: &Self) -> PyResult<Self> { Ok(Self(self.0.add(&other.0).map_err(err)?)) }

  fn __eq__(&self, other: &Self) -> bool { self.0 == other.0 }

  fn __str__(&self) -> String { self.0.to_string() }

  fn __repr__(&self) -> String { format!("LogMeroForm('{}')", self.0) }
}

#[pymodule]
fn charclass_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
  m.add("CharclassError", m.py().get_type::<CharclassError>())?;
  m.add_class::<RegulatorValue>()?;
  m.add_class::<PyLogMeroForm>()?;
  m.add_function(wrap_pyfunction!(transgress, m)?)?;
  m.add_function(wrap_pyfunction!(cs_cocycle, m)?)?;
  m.add_function(wrap_pyfunction!(borel_cocycle, m)?)?;
  m.add_function(wrap_pyfunction!(cocycle_residual, m)?)?;
  m.add_function(wrap_pyfunction!(chern_poly, m)?)?;
  m.add_function(wrap_pyfunction!(verify, m)?)?;
  Ok(())
}
