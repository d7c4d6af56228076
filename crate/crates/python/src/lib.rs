use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use woven_core::certificates::{self as certs, PerturbationMode, RieszPartOperator};
use woven_core::duality::{self, BesselSequence};
use woven_core::weaving::{self, DEFAULT_ENUMERATION_CAP};
use woven_core::{generators, io, CMatrix, Complex64, FrameError, DEFAULT_TOL};

fn err(e: FrameError) -> PyErr {
    match e {
        FrameError::EnumerationTooLarge { .. } => PyOverflowError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err(
            "matrix must be a non-empty rectangular list of rows",
        ));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A finite frame in `C^dim`, stored by its synthesis matrix.
#[pyclass(name = "Frame", module = "woven_frames", from_py_object)]
#[derive(Clone)]
struct PyFrame {
    inner: woven_core::Frame,
}

impl From<woven_core::Frame> for PyFrame {
    fn from(inner: woven_core::Frame) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyFrame {
    #[new]
    #[pyo3(signature = (dim, vectors, tol = DEFAULT_TOL))]
    fn new(dim: usize, vectors: Vec<Vec<Complex64>>, tol: f64) -> PyResult<Self> {
        woven_core::Frame::new(dim, vectors, tol).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_frame(text).map(Self::from).map_err(err)
    }

    fn to_json(&self) -> String {
        io::frame_to_string(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.inner.tol()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Frame(dim={}, len={})", self.inner.dim(), self.inner.len())
    }

    fn vectors(&self) -> Vec<Vec<Complex64>> {
        self.inner.vectors()
    }

    fn norms(&self) -> Vec<f64> {
        self.inner.norms()
    }

    fn frame_operator(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.frame_operator())
    }

    fn bounds(&self) -> (f64, f64) {
        let b = self.inner.optimal_bounds();
        (b.lower, b.upper)
    }

    fn classify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.classify())
    }

    fn apply_operator(&self, t: Vec<Vec<Complex64>>) -> PyResult<Self> {
        self.inner.apply_operator(&matrix(t)?).map(Self::from).map_err(err)
    }

    fn canonical_dual(&self) -> PyResult<Self> {
        duality::canonical_dual(&self.inner).map(Self::from).map_err(err)
    }

    fn parsevalize(&self) -> PyResult<Self> {
        generators::parsevalize(&self.inner).map(Self::from).map_err(err)
    }

    fn is_dual(&self, other: &PyFrame) -> PyResult<bool> {
        duality::is_dual(&self.inner, &other.inner, self.inner.tol().max(1e-10)).map_err(err)
    }

    /// Returns `(excess, kernel vectors)`.
    fn excess(&self) -> (usize, Vec<Vec<Complex64>>) {
        let ex = duality::excess_and_kernel(&self.inner);
        let vectors = ex
            .kernel_vectors()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        (ex.excess, vectors)
    }

    /// Returns `(riesz indices, redundant indices)`, zero-based.
    fn riesz_decompose(&self) -> PyResult<(Vec<usize>, Vec<usize>)> {
        let split = duality::riesz_decompose(&self.inner).map_err(err)?;
        Ok((split.riesz_indices, split.redundant_indices))
    }
}

fn frames(items: &[PyFrame]) -> Vec<woven_core::Frame> {
    items.iter().map(|f| f.inner.clone()).collect()
}

#[pyfunction]
#[pyo3(signature = (frames_in, tol = DEFAULT_TOL, cap = DEFAULT_ENUMERATION_CAP))]
fn woven_oracle(py: Python<'_>, frames_in: Vec<PyFrame>, tol: f64, cap: u64) -> PyResult<Py<PyAny>> {
    let report = weaving::woven_oracle_with_cap(&frames(&frames_in), tol, cap).map_err(err)?;
    let out = to_py(py, &report)?;
    out.bind(py)
        .set_item("worst_assignment", report.worst_assignment.labels)?;
    Ok(out)
}

#[pyfunction]
fn weave(frames_in: Vec<PyFrame>, assignment: Vec<usize>) -> PyResult<PyFrame> {
    weaving::weave(&frames(&frames_in), &weaving::Assignment::new(assignment))
        .map(PyFrame::from)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (basis1, basis2, tol = DEFAULT_TOL))]
fn subspace_distance(
    py: Python<'_>,
    basis1: Vec<Vec<Complex64>>,
    basis2: Vec<Vec<Complex64>>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let d = weaving::subspace_distance(&matrix(basis1)?, &matrix(basis2)?, tol).map_err(err)?;
    to_py(py, &d)
}

#[pyfunction]
#[pyo3(signature = (phi, psi, cap = DEFAULT_ENUMERATION_CAP))]
fn min_partition_distance(py: Python<'_>, phi: &PyFrame, psi: &PyFrame, cap: u64) -> PyResult<Py<PyAny>> {
    let d = weaving::min_partition_distance(&phi.inner, &psi.inner, cap).map_err(err)?;
    to_py(py, &d)
}

#[pyfunction]
#[pyo3(signature = (dim, size, lower = 1.0, upper = 1.0, seed = 0))]
fn random_frame(dim: usize, size: usize, lower: f64, upper: f64, seed: u64) -> PyResult<PyFrame> {
    generators::random_frame(dim, size, (lower, upper), seed)
        .map(PyFrame::from)
        .map_err(err)
}

#[pyfunction]
fn harmonic_frame(dim: usize, size: usize) -> PyResult<PyFrame> {
    generators::harmonic_frame(dim, size).map(PyFrame::from).map_err(err)
}

/// The Parseval example frame in `C^dim` and the vectors of its null direction sequence.
#[pyfunction]
fn example_frame(dim: usize) -> PyResult<(PyFrame, Vec<Vec<Complex64>>)> {
    if dim < 2 {
        return Err(PyValueError::new_err("dim must be at least 2"));
    }
    let (phi, u) = generators::example_family(dim);
    Ok((phi.into(), u.vectors()))
}

#[pyfunction]
fn paulsen_threshold(dim: usize, size: usize, lower: f64, alpha: f64) -> PyResult<f64> {
    certs::paulsen_threshold(dim, size, lower, alpha).map_err(err)
}

fn cert(py: Python<'_>, c: woven_core::Result<certs::Certificate>) -> PyResult<Py<PyAny>> {
    to_py(py, &c.map_err(err)?)
}

#[pyfunction]
fn certify_invertible(py: Python<'_>, phi: &PyFrame, t: Vec<Vec<Complex64>>) -> PyResult<Py<PyAny>> {
    cert(py, certs::cert_invertible_operator(&phi.inner, &matrix(t)?))
}

#[pyfunction]
fn certify_dual(py: Python<'_>, phi: &PyFrame, u: Vec<Vec<Complex64>>, alpha: f64) -> PyResult<Py<PyAny>> {
    let u = BesselSequence::from_vectors(phi.inner.dim(), u).map_err(err)?;
    cert(py, certs::cert_dual_weaving(&phi.inner, &u, alpha))
}

#[pyfunction]
#[pyo3(signature = (phi, cap = DEFAULT_ENUMERATION_CAP))]
fn certify_canonical(py: Python<'_>, phi: &PyFrame, cap: u64) -> PyResult<Py<PyAny>> {
    cert(
        py,
        certs::cert_canonical_dual_woven(&phi.inner, RieszPartOperator::FullFrame, cap),
    )
}

#[pyfunction]
#[pyo3(signature = (phi, psi, cap = DEFAULT_ENUMERATION_CAP))]
fn certify_two_operator_canonical(py: Python<'_>, phi: &PyFrame, psi: &PyFrame, cap: u64) -> PyResult<Py<PyAny>> {
    cert(py, certs::cert_two_operator_canonical(&phi.inner, &psi.inner, cap))
}

#[pyfunction]
fn certify_perturbation(py: Python<'_>, phi: &PyFrame, psi: &PyFrame) -> PyResult<Py<PyAny>> {
    cert(
        py,
        certs::cert_perturbation(&phi.inner, &psi.inner, PerturbationMode::ExactMu),
    )
}

#[pyfunction]
fn certify_equal_norm_parseval(
    py: Python<'_>,
    phi: &PyFrame,
    psi: &PyFrame,
    eps: f64,
    alpha: f64,
) -> PyResult<Py<PyAny>> {
    cert(py, certs::cert_equal_norm_parseval(&phi.inner, &psi.inner, eps, alpha))
}

#[pymodule]
fn woven_frames(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    m.add_function(wrap_pyfunction!(woven_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(weave, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(min_partition_distance, m)?)?;
    m.add_function(wrap_pyfunction!(random_frame, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_frame, m)?)?;
    m.add_function(wrap_pyfunction!(example_frame, m)?)?;
    m.add_function(wrap_pyfunction!(paulsen_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(certify_invertible, m)?)?;
    m.add_function(wrap_pyfunction!(certify_dual, m)?)?;
    m.add_function(wrap_pyfunction!(certify_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(certify_two_operator_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(certify_perturbation, m)?)?;
    m.add_function(wrap_pyfunction!(certify_equal_norm_parseval, m)?)?;
    Ok(())
}
