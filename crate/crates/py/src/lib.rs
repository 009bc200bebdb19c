//! Python bindings: circuits, elision, gate counts and the experiment
//! runners.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qburgers::ansatz::{build_ansatz, AnsatzSpec, Head, Variant};
use qburgers::burgers::BurgersGrid;
use qburgers::experiment::{gatecount_rows, run_burgers, run_fit, ExperimentConfig, ExperimentKind};
use qburgers::hadamard::{build_gterm_circuit, gterm_oracle, GTermKind};
use qburgers::lowdepth::{detect_hadamard_form, elide_ancilla_controls};
use qburgers::transpile::{count_report, Basis};

fn err(e: qburgers::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn variant(s: &str) -> PyResult<Variant> {
    match s {
        "cry" => Ok(Variant::Cry),
        "cu_alt" => Ok(Variant::CuAlt),
        _ => Err(PyValueError::new_err(format!("unknown variant '{s}' (cry, cu_alt)"))),
    }
}

fn head(s: &str) -> PyResult<Head> {
    match s {
        "x" => Ok(Head::X),
        "ry" => Ok(Head::Ry),
        _ => Err(PyValueError::new_err(format!("unknown head '{s}' (x, ry)"))),
    }
}

fn basis(s: &str) -> PyResult<Basis> {
    match s {
        "sc" => Ok(Basis::Sc),
        "ion" => Ok(Basis::Ion),
        _ => Err(PyValueError::new_err(format!("unknown basis '{s}' (sc, ion)"))),
    }
}

fn gterm_kind(s: &str) -> PyResult<GTermKind> {
    GTermKind::ALL
        .into_iter()
        .find(|k| k.label() == s)
        .ok_or_else(|| PyValueError::new_err(format!("unknown G-term '{s}'")))
}

#[pyclass(name = "Circuit", module = "qburgers_py", from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: qburgers::circuit::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        qburgers::circuit::parse_circuit(text).map(|inner| Self { inner }).map_err(err)
    }

    fn text(&self) -> String {
        qburgers::circuit::serialize_circuit(&self.inner)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn ancilla(&self) -> Option<usize> {
        self.inner.ancilla()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Output amplitudes from |0…0⟩, index bit q = qubit q.
    fn statevector(&self) -> Vec<Complex64> {
        qburgers::sim::run_statevector(&self.inner).into_amplitudes()
    }

    /// Copy with the ancilla dropped from every gate that keeps another control.
    fn elide(&self) -> PyResult<Self> {
        let h = detect_hadamard_form(&self.inner).map_err(err)?;
        Ok(Self {
            inner: elide_ancilla_controls(&h),
        })
    }

    /// `{"g1", "g2", "depth"}` after transpiling to `basis` ("sc" or "ion").
    fn gate_counts<'py>(&self, py: Python<'py>, basis_name: &str) -> PyResult<Bound<'py, PyDict>> {
        let r = count_report(&self.inner, basis(basis_name)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("g1", r.g1)?;
        d.set_item("g2", r.g2)?;
        d.set_item("depth", r.depth)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Circuit(width={}, gates={})", self.inner.width(), self.inner.len())
    }
}

/// Ancilla-controlled state-preparation ansatz.
#[pyfunction]
#[pyo3(signature = (n, d, params, variant_name="cry", head_name="x"))]
fn ansatz(n: usize, d: usize, params: Vec<f64>, variant_name: &str, head_name: &str) -> PyResult<PyCircuit> {
    let spec = AnsatzSpec::new(n, d, variant(variant_name)?, head(head_name)?).map_err(err)?;
    build_ansatz(&spec, &params).map(|inner| PyCircuit { inner }).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, d, head_name="x"))]
fn ansatz_param_count(n: usize, d: usize, head_name: &str) -> PyResult<usize> {
    Ok(AnsatzSpec::new(n, d, Variant::Cry, head(head_name)?).map_err(err)?.param_count())
}

/// Hadamard-test circuit for one G-term ("overlap", "shift_plus", ...).
#[pyfunction]
fn gterm_circuit(kind: &str, u_t: &PyCircuit, u_lambda: &PyCircuit) -> PyResult<PyCircuit> {
    build_gterm_circuit(gterm_kind(kind)?, &u_t.inner, &u_lambda.inner)
        .map(|inner| PyCircuit { inner })
        .map_err(err)
}

/// Dense-matrix reference value of a G-term.
#[pyfunction]
fn gterm_reference(kind: &str, u_t: &PyCircuit, u_lambda: &PyCircuit) -> PyResult<Complex64> {
    gterm_oracle(gterm_kind(kind)?, &u_t.inner, &u_lambda.inner).map_err(err)
}

/// One explicit finite-difference step on a periodic grid over `[a, b)`.
#[pyfunction]
fn classical_step(u: Vec<f64>, a: f64, b: f64, tau: f64, nu: f64) -> PyResult<Vec<f64>> {
    let n = u.len().trailing_zeros() as usize;
    if u.len() != 1 << n {
        return Err(PyValueError::new_err("field length must be a power of two"));
    }
    let g = BurgersGrid::new(a, b, n, tau, nu).map_err(err)?;
    Ok(qburgers::burgers::classical_step(&g, &u))
}

fn config(kind: ExperimentKind, toml_text: &str) -> PyResult<ExperimentConfig> {
    ExperimentConfig::from_toml(toml_text, Some(kind)).map_err(err)
}

/// Variational run; `config` is TOML merged over the defaults of the
/// `burgers_run` kind (or whatever `kind` it names).
#[pyfunction]
#[pyo3(signature = (config=""))]
fn burgers_run<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = self::config(ExperimentKind::BurgersRun, config)?;
    let out = py.detach(|| run_burgers(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t", out.steps.iter().map(|s| s.t).collect::<Vec<_>>())?;
    d.set_item("lambda", out.steps.iter().map(|s| s.lambda).collect::<Vec<_>>())?;
    d.set_item("infidelity", out.steps.iter().map(|s| s.infidelity).collect::<Vec<_>>())?;
    d.set_item("u_vqa", out.steps.iter().map(|s| s.u_vqa.clone()).collect::<Vec<_>>())?;
    d.set_item("u_classical", out.steps.iter().map(|s| s.u_classical.clone()).collect::<Vec<_>>())?;
    d.set_item("params", out.steps.iter().map(|s| s.params.clone()).collect::<Vec<_>>())?;
    d.set_item("fit_infidelity", out.fit.infidelity)?;
    Ok(d)
}

/// Fits the ansatz to the initial Gaussian; returns `(params, infidelity)`.
#[pyfunction]
#[pyo3(signature = (config=""))]
fn fit_initial(py: Python<'_>, config: &str) -> PyResult<(Vec<f64>, f64)> {
    let cfg = self::config(ExperimentKind::FitInitial, config)?;
    let fit = py.detach(|| run_fit(&cfg)).map_err(err)?;
    Ok((fit.params, fit.infidelity))
}

/// Gate-count rows for one problem size, as dicts.
#[pyfunction]
#[pyo3(signature = (n, variant_name="cu_alt"))]
fn gatecount<'py>(py: Python<'py>, n: usize, variant_name: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    gatecount_rows(n, variant(variant_name)?)
        .map_err(err)?
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("architecture", r.architecture.label())?;
            d.set_item("scheme", r.scheme)?;
            d.set_item("granularity", r.granularity)?;
            d.set_item("d", r.d)?;
            d.set_item("g1", r.g1)?;
            d.set_item("g2", r.g2)?;
            d.set_item("depth", r.depth)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn noise_profiles() -> Vec<&'static str> {
    qburgers::noise::PROFILE_NAMES.to_vec()
}

#[pymodule]
fn qburgers_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(ansatz, m)?)?;
    m.add_function(wrap_pyfunction!(ansatz_param_count, m)?)?;
    m.add_function(wrap_pyfunction!(gterm_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(gterm_reference, m)?)?;
    m.add_function(wrap_pyfunction!(classical_step, m)?)?;
    m.add_function(wrap_pyfunction!(burgers_run, m)?)?;
    m.add_function(wrap_pyfunction!(fit_initial, m)?)?;
    m.add_function(wrap_pyfunction!(gatecount, m)?)?;
    m.add_function(wrap_pyfunction!(noise_profiles, m)?)?;
    Ok(())
}
