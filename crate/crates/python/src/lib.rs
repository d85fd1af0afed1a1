//! Python bindings. Structured results come back as plain dicts decoded
//! from the same JSON the command-line tool emits.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mdlab_core::chsh::{self, CorrelatorQuad};
use mdlab_core::runner::{self, RawConfig};
use mdlab_core::{estimator, lpopt, mdep, Error, Label, ModelDescriptor, Outcome, RandomStream, Setting, UnitVec3};

create_exception!(mdlab, SolverError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(msg) => PyValueError::new_err(msg),
        Error::SolverFailure(msg) => SolverError::new_err(msg),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn quad(values: [f64; 4]) -> PyResult<CorrelatorQuad> {
    CorrelatorQuad::from_array(values).map_err(py_err)
}

/// A setting is either a 3-vector (normalized here) or a label
/// `"X"`, `"X'"`, `"Y"`, `"Y'"`.
fn setting(obj: &Bound<'_, PyAny>) -> PyResult<Setting> {
    if let Ok(name) = obj.extract::<String>() {
        return name.parse::<Label>().map(Setting::Label).map_err(py_err);
    }
    let [x, y, z]: [f64; 3] = obj.extract()?;
    UnitVec3::new(x, y, z).map(Setting::Direction).map_err(py_err)
}

fn outcome(v: i8) -> PyResult<Outcome> {
    Outcome::try_from(v).map_err(py_err)
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Model {
    inner: ModelDescriptor,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn singlet_onesided() -> Self {
        Self {
            inner: ModelDescriptor::SingletOnesided,
        }
    }

    #[staticmethod]
    #[pyo3(signature = (p, a = 1, b = 1))]
    fn toy_table(p: f64, a: i8, b: i8) -> PyResult<Self> {
        let inner = ModelDescriptor::toy(p, outcome(a)?, outcome(b)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn uniform_baseline() -> Self {
        Self {
            inner: ModelDescriptor::UniformBaseline,
        }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    fn analytic_correlator(&self, alice: &Bound<'_, PyAny>, bob: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner
            .analytic_correlator(&setting(alice)?, &setting(bob)?)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        match self.inner {
            ModelDescriptor::ToyTable(t) => format!(
                "Model.toy_table(p={}, a={}, b={})",
                t.p(),
                t.a().value(),
                t.b().value()
            ),
            other => format!("Model.{}()", other.kind().name().replace('-', "_")),
        }
    }
}

#[pyfunction]
fn unit(x: f64, y: f64, z: f64) -> PyResult<[f64; 3]> {
    UnitVec3::new(x, y, z).map(|v| v.components()).map_err(py_err)
}

#[pyfunction]
fn m_sphere_pair(beta: f64) -> PyResult<f64> {
    mdep::m_sphere_pair(beta).map_err(py_err)
}

#[pyfunction]
fn m_supremum<'py>(py: Python<'py>, model: &Model) -> PyResult<Bound<'py, PyAny>> {
    let report = mdep::m_supremum(&model.inner).map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
fn free_will(m: f64) -> PyResult<f64> {
    mdep::free_will(m).map_err(py_err)
}

#[pyfunction]
fn mutual_information_onesided() -> f64 {
    mdep::mutual_information_onesided()
}

#[pyfunction]
#[pyo3(signature = (correlators, variant = 0))]
fn chsh_value(correlators: [f64; 4], variant: usize) -> PyResult<f64> {
    chsh::chsh_value(&quad(correlators)?, variant).map_err(py_err)
}

/// `(value, variant)` of the largest CHSH variant.
#[pyfunction]
fn chsh_max(correlators: [f64; 4]) -> PyResult<(f64, usize)> {
    Ok(chsh::chsh_max(&quad(correlators)?))
}

#[pyfunction]
#[pyo3(signature = (b, m, tol = 0.0))]
fn bound_check<'py>(py: Python<'py>, b: f64, m: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &chsh::bound_check(b, m, tol).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (model, alice, bob, shots, seed = 0, context = 0))]
fn estimate_correlator<'py>(
    py: Python<'py>,
    model: &Model,
    alice: &Bound<'py, PyAny>,
    bob: &Bound<'py, PyAny>,
    shots: u64,
    seed: u64,
    context: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (alice, bob) = (setting(alice)?, setting(bob)?);
    let stream = RandomStream::new(seed, context, 0);
    let inner = model.inner;
    let est = py
        .detach(|| estimator::estimate_correlator(&inner, &alice, &bob, shots, &stream))
        .map_err(py_err)?;
    to_py(py, &est)
}

#[pyfunction]
fn min_m_for_chsh<'py>(py: Python<'py>, target_b: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lpopt::min_m_for_chsh(target_b).map_err(py_err)?)
}

#[pyfunction]
fn min_m_for_correlators<'py>(py: Python<'py>, correlators: [f64; 4]) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lpopt::min_m_for_correlators(&quad(correlators)?).map_err(py_err)?)
}

/// Runs a command with the same options the CLI accepts, e.g.
/// `run("table", p=0.5)`. Returns the full report.
#[pyfunction]
#[pyo3(signature = (command, **options))]
fn run<'py>(py: Python<'py>, command: &str, options: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let text: String = match options {
        Some(opts) => py.import("json")?.call_method1("dumps", (opts,))?.extract()?,
        None => "{}".into(),
    };
    let mut raw: RawConfig =
        serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("options: {e}")))?;
    raw.command = Some(command.to_string());
    let config = raw.resolve().map_err(py_err)?;
    let report = py.detach(|| runner::run(&config)).map_err(py_err)?;
    to_py(py, &report)
}

#[pymodule]
fn mdlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_function(wrap_pyfunction!(unit, m)?)?;
    m.add_function(wrap_pyfunction!(m_sphere_pair, m)?)?;
    m.add_function(wrap_pyfunction!(m_supremum, m)?)?;
    m.add_function(wrap_pyfunction!(free_will, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information_onesided, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_value, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_max, m)?)?;
    m.add_function(wrap_pyfunction!(bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_correlator, m)?)?;
    m.add_function(wrap_pyfunction!(min_m_for_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(min_m_for_correlators, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
