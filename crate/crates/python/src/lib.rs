//! Python bindings: machines, simulation, abstraction, equivalence and
//! conversions. Timestamps cross the boundary as exact strings such as
//! `"5/2"`; reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyFloat, PyString};
use serde_json::Value;
use tfsm_core::format::{
    fsm_json, parse_machine, parse_machine_unchecked, serialize_machine, validation_json, verdict_json,
};
use tfsm_core::time::{format_time, parse_time, Rational};
use tfsm_core::transform::{lcro_guarded_to_timeout, loopfree_timeout_to_guarded};
use tfsm_core::{abstract_machine, cross_equivalent, embed, fixtures, run, TimedWord};

create_exception!(pytfsm, TfsmError, PyException);

fn error(e: impl ToString) -> PyErr {
    TfsmError::new_err(e.to_string())
}

fn to_python<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn timestamp(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if obj.is_instance_of::<PyFloat>() {
        return Err(PyValueError::new_err("floating-point timestamps are not accepted; pass \"p/q\" or a Fraction"));
    }
    let text = if obj.is_instance_of::<PyString>() { obj.extract::<String>()? } else { obj.str()?.to_string() };
    parse_time(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A timed machine of any kind.
#[pyclass(module = "pytfsm", name = "Machine", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMachine {
    inner: tfsm_core::Machine,
}

impl From<tfsm_core::Machine> for PyMachine {
    fn from(inner: tfsm_core::Machine) -> Self {
        PyMachine { inner }
    }
}

#[pymethods]
impl PyMachine {
    /// Parses and validates a machine document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_machine(text).map(Self::from).map_err(error)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(error)?;
        Self::from_json(&text)
    }

    /// One of the built-in example machines: `fig1a`, `fig2a`, `fig3a`,
    /// `m1` or `m2`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let m: tfsm_core::Machine = match name {
            "fig1a" => fixtures::fig1a().into(),
            "fig2a" => fixtures::fig2a().into(),
            "fig3a" => fixtures::fig3a().into(),
            "m1" => fixtures::m1().into(),
            "m2" => fixtures::m2().into(),
            _ => return Err(PyValueError::new_err(format!("unknown fixture `{name}`"))),
        };
        Ok(m.into())
    }

    /// Canonical JSON serialization.
    fn to_json(&self) -> String {
        serialize_machine(&self.inner)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.signature().states.clone()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.signature().inputs.clone()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.inner.signature().outputs.clone()
    }

    #[getter]
    fn max_constant(&self) -> u64 {
        self.inner.max_constant()
    }

    /// Validation report as a dict with `ok` and `violations`.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &validation_json(&self.inner.validate()))
    }

    /// Runs a timed word given as `(symbol, timestamp)` pairs and returns
    /// the timed output word in the same shape.
    fn simulate(&self, word: Vec<(String, Bound<'_, PyAny>)>) -> PyResult<Vec<(String, String)>> {
        let entries = word.iter().map(|(s, t)| Ok((s.clone(), timestamp(t)?))).collect::<PyResult<Vec<_>>>()?;
        let word = TimedWord::new(entries).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let r = run(&self.inner, &word).map_err(error)?;
        Ok(r.outputs.entries().iter().map(|(o, t)| (o.clone(), format_time(t))).collect())
    }

    /// The untimed abstraction matching the machine kind, as a dict.
    #[pyo3(signature = (n=None))]
    fn abstraction<'py>(&self, py: Python<'py>, n: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
        let fsm = abstract_machine(&self.inner, n).map_err(error)?;
        to_python(py, &fsm_json(&fsm))
    }

    /// Converts to `"guarded"` or `"timeout"`.
    fn convert(&self, to: &str) -> PyResult<Self> {
        use tfsm_core::Machine::*;
        let m: tfsm_core::Machine = match (to, &self.inner) {
            ("guarded", Guarded(_)) | ("timeout", Timeout(_)) => self.inner.clone(),
            ("guarded", Timeout(t)) => loopfree_timeout_to_guarded(t).map_err(error)?.into(),
            ("timeout", Guarded(g)) => lcro_guarded_to_timeout(g).map_err(error)?.into(),
            ("guarded" | "timeout", General(_)) => {
                return Err(error("machines with guards and timeouts cannot be converted"))
            }
            _ => return Err(PyValueError::new_err(format!("unknown target `{to}`"))),
        };
        Ok(m.into())
    }

    /// The same behavior as a machine with guards and timeouts.
    fn embed(&self) -> Self {
        tfsm_core::Machine::General(embed(&self.inner)).into()
    }

    fn __repr__(&self) -> String {
        let s = self.inner.signature();
        format!("Machine(kind={:?}, states={}, inputs={:?})", self.kind(), s.states.len(), s.inputs)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Parses a document without validating it.
#[pyfunction]
fn parse_unchecked(text: &str) -> PyResult<PyMachine> {
    parse_machine_unchecked(text).map(PyMachine::from).map_err(error)
}

/// Decides equivalence of two machines of any kinds. Returns a dict with
/// `equivalent` and, when they differ, a `counterexample`.
#[pyfunction]
fn equivalent<'py>(py: Python<'py>, a: &PyMachine, b: &PyMachine) -> PyResult<Bound<'py, PyAny>> {
    let verdict = cross_equivalent(&a.inner, &b.inner).map_err(error)?;
    to_python(py, &verdict_json(&verdict))
}

#[pymodule]
fn pytfsm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMachine>()?;
    m.add_function(wrap_pyfunction!(parse_unchecked, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add("TfsmError", m.py().get_type::<TfsmError>())?;
    Ok(())
}
