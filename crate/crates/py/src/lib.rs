//! Python bindings for `semisim`.
//!
//! Structured results (analyses, compile and verification reports) come back
//! as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyValueError};
use pyo3::prelude::*;
use semisim::algebra::CascadeSpec;
use semisim::compiler::{self, Construction};
use semisim::harness;
use semisim::tkernel::TransformerNet;
use semisim::Error;

create_exception!(semisim_py, SemisimError, PyException);
create_exception!(semisim_py, RefusalError, SemisimError);
create_exception!(semisim_py, UnsupportedError, SemisimError);
create_exception!(semisim_py, DecodeError, SemisimError);

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Input(_) | Error::Json(_) => PyValueError::new_err(msg),
        Error::Io(_) => PyIOError::new_err(msg),
        Error::Refusal(_) => RefusalError::new_err(msg),
        Error::Unsupported(_) => UnsupportedError::new_err(msg),
        Error::Decode { .. } => DecodeError::new_err(msg),
        Error::Resource(_) => SemisimError::new_err(msg),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// A deterministic semiautomaton over labelled symbols.
#[pyclass(name = "Semiautomaton", module = "semisim_py")]
struct PySemiautomaton {
    inner: semisim::Semiautomaton,
}

#[pymethods]
impl PySemiautomaton {
    /// `delta[s][q]` is the state reached from `q` on symbol `s`.
    #[new]
    #[pyo3(signature = (num_states, alphabet, delta, name = None))]
    fn new(num_states: usize, alphabet: Vec<String>, delta: Vec<Vec<usize>>, name: Option<String>) -> PyResult<Self> {
        let mut a = semisim::Semiautomaton::new(num_states, alphabet, delta).map_err(err)?;
        if let Some(n) = name {
            a = a.with_name(n);
        }
        Ok(PySemiautomaton { inner: a })
    }

    /// Builtin such as `"parity"`, `"gridworld(3)"` or `"memory(4)"`.
    #[staticmethod]
    fn builtin(spec: &str) -> PyResult<Self> {
        Ok(PySemiautomaton { inner: semisim::automaton::builtin(spec).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PySemiautomaton { inner: semisim::Semiautomaton::from_json(s).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_string)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet().to_vec()
    }

    #[getter]
    fn delta(&self) -> Vec<Vec<usize>> {
        self.inner.delta().to_vec()
    }

    fn encode(&self, labels: Vec<String>) -> PyResult<Vec<usize>> {
        self.inner.encode_symbols(&labels).map_err(err)
    }

    /// States after each symbol, starting from `q0`.
    #[pyo3(signature = (inputs, q0 = 0))]
    fn run(&self, inputs: Vec<usize>, q0: usize) -> PyResult<Vec<usize>> {
        Ok(self.inner.run(q0, &inputs).map_err(err)?.states)
    }

    fn __repr__(&self) -> String {
        format!(
            "Semiautomaton({}, states={}, alphabet={:?})",
            self.inner.name().unwrap_or("unnamed"),
            self.inner.num_states(),
            self.inner.alphabet()
        )
    }
}

/// A compiled transformer with fixed weights.
#[pyclass(name = "TransformerNet", module = "semisim_py")]
struct PyNet {
    inner: TransformerNet,
}

#[pymethods]
impl PyNet {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyNet { inner: TransformerNet::from_json(s).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyNet { inner: TransformerNet::load(path).map_err(err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn construction(&self) -> String {
        self.inner.construction.clone()
    }

    #[getter]
    fn t_max(&self) -> usize {
        self.inner.t_max
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet.clone()
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.metrics)
    }

    /// Decoded state after each input symbol.
    fn evaluate(&self, py: Python<'_>, inputs: Vec<usize>) -> PyResult<Vec<usize>> {
        py.detach(|| self.inner.evaluate(&inputs)).map_err(err)
    }

    fn evaluate_labels(&self, py: Python<'_>, labels: Vec<String>) -> PyResult<Vec<usize>> {
        py.detach(|| self.inner.evaluate_labels(&labels)).map_err(err)
    }

    /// Activations after `layers` layers (all by default), one row per
    /// position including the padding prefix.
    #[pyo3(signature = (inputs, layers = None))]
    fn forward(&self, py: Python<'_>, inputs: Vec<usize>, layers: Option<usize>) -> PyResult<Vec<Vec<f64>>> {
        let upto = layers.unwrap_or(self.inner.depth());
        let flat = py.detach(|| self.inner.plan().forward_layers(&inputs, upto)).map_err(err)?;
        Ok(flat.chunks(self.inner.d).map(<[f64]>::to_vec).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "TransformerNet({}, T={}, depth={}, d={})",
            self.inner.construction,
            self.inner.t_max,
            self.inner.depth(),
            self.inner.d
        )
    }
}

/// Algebraic summary of the transition semigroup.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, a: &PySemiautomaton) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &semisim::algebra::analyze(&a.inner).map_err(err)?)
}

/// Compiles `a` for inputs of length up to `t_max`. Returns `(net, report)`.
#[pyfunction]
#[pyo3(signature = (a, construction, t_max, q0 = 0))]
fn compile<'py>(
    py: Python<'py>,
    a: &PySemiautomaton,
    construction: &str,
    t_max: usize,
    q0: usize,
) -> PyResult<(PyNet, Bound<'py, PyAny>)> {
    let c: Construction = construction.parse().map_err(err)?;
    let (net, report) = py.detach(|| compiler::compile(&a.inner, q0, c, t_max)).map_err(err)?;
    Ok((PyNet { inner: net }, to_py(py, &report)?))
}

/// Compiles a cascade given as JSON with one initial state per component.
#[pyfunction]
fn compile_cascade<'py>(py: Python<'py>, spec_json: &str, q0: Vec<usize>, t_max: usize) -> PyResult<(PyNet, Bound<'py, PyAny>)> {
    let spec: CascadeSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (net, report) = py.detach(|| compiler::compile_cascade(&spec, &q0, t_max)).map_err(err)?;
    Ok((PyNet { inner: net }, to_py(py, &report)?))
}

/// Names accepted by [`compile`].
#[pyfunction]
fn constructions() -> Vec<&'static str> {
    Construction::ALL.iter().map(|c| c.name()).collect()
}

#[pyfunction]
#[pyo3(signature = (a, net, t = None, trials = 1000, seed = 0, q0 = 0))]
fn differential_test<'py>(
    py: Python<'py>,
    a: &PySemiautomaton,
    net: &PyNet,
    t: Option<usize>,
    trials: u64,
    seed: u64,
    q0: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let t = t.unwrap_or(net.inner.t_max);
    let r = py.detach(|| harness::differential_test(&a.inner, q0, &net.inner, t, trials, seed)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (a, net, t = None, q0 = 0))]
fn exhaustive_test<'py>(
    py: Python<'py>,
    a: &PySemiautomaton,
    net: &PyNet,
    t: Option<usize>,
    q0: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let t = t.unwrap_or(net.inner.t_max);
    let r = py.detach(|| harness::exhaustive_test(&a.inner, q0, &net.inner, t)).map_err(err)?;
    to_py(py, &r)
}

/// Closed-form final state of `gridworld(s)` from 0 on moves in {-1, 0, 1}.
/// Returns `(state, t_final, boundary)`.
#[pyfunction]
fn gridworld_final_state(moves: Vec<i8>, s: usize) -> PyResult<(usize, usize, usize)> {
    let r = compiler::gridworld_final_state(&moves, s).map_err(err)?;
    Ok((r.state, r.t_final, r.boundary))
}

#[pymodule]
fn semisim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PySemiautomaton>()?;
    m.add_class::<PyNet>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(compile_cascade, m)?)?;
    m.add_function(wrap_pyfunction!(constructions, m)?)?;
    m.add_function(wrap_pyfunction!(differential_test, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_test, m)?)?;
    m.add_function(wrap_pyfunction!(gridworld_final_state, m)?)?;
    m.add("SemisimError", py.get_type::<SemisimError>())?;
    m.add("RefusalError", py.get_type::<RefusalError>())?;
    m.add("UnsupportedError", py.get_type::<UnsupportedError>())?;
    m.add("DecodeError", py.get_type::<DecodeError>())?;
    Ok(())
}
