//! Python bindings. Structured results cross the boundary as JSON and come
//! back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use social_deception::attacks::{self, Selectors};
use social_deception::network::{perron_of, CombinationMatrix};
use social_deception::probability::{self, Hypothesis};
use social_deception::simulator::{self, Scenario};

fn err(e: social_deception::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Pair of observation distributions, one per candidate state.
#[pyclass(
    name = "LikelihoodModel",
    module = "social_deception",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyModel(probability::LikelihoodModel);

#[pymethods]
impl PyModel {
    #[new]
    fn new(theta1: Vec<f64>, theta2: Vec<f64>) -> PyResult<Self> {
        probability::LikelihoodModel::from_rows(&theta1, &theta2)
            .map(PyModel)
            .map_err(err)
    }

    /// Binary symmetric model with `L(0|theta1) = p`.
    #[staticmethod]
    fn bsc(p: f64) -> PyResult<Self> {
        probability::bsc_model(p).map(PyModel).map_err(err)
    }

    #[getter]
    fn theta1(&self) -> Vec<f64> {
        self.0.given(Hypothesis::Theta1).mass().to_vec()
    }

    #[getter]
    fn theta2(&self) -> Vec<f64> {
        self.0.given(Hypothesis::Theta2).mass().to_vec()
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.0.alphabet_size()
    }

    fn is_informative(&self) -> bool {
        self.0.is_informative()
    }

    fn separability<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &attacks::separability(&self.0).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "LikelihoodModel(theta1={:?}, theta2={:?})",
            self.theta1(),
            self.theta2()
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let p = probability::make_pmf(&p).map_err(err)?;
    let q = probability::make_pmf(&q).map_err(err)?;
    probability::kl_divergence(&p, &q).map_err(err)
}

/// Perron vector of a left-stochastic combination matrix given by rows.
#[pyfunction]
fn perron_vector(rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let a = CombinationMatrix::from_rows(rows).map_err(err)?;
    Ok(perron_of(&a).map_err(err)?.entries().to_vec())
}

#[pyfunction]
fn unknown_divergence_attack(model: &PyModel, epsilon: f64) -> PyResult<PyModel> {
    attacks::unknown_divergence_attack(&model.0, epsilon)
        .map(PyModel)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (model, centrality, s1, s2, epsilon, x1_fraction = 0.5, beta_fraction = 0.5))]
fn known_divergence_attack(
    model: &PyModel,
    centrality: f64,
    s1: f64,
    s2: f64,
    epsilon: f64,
    x1_fraction: f64,
    beta_fraction: f64,
) -> PyResult<PyModel> {
    let sel = Selectors {
        x1_fraction,
        beta_fraction,
        pair: None,
    };
    attacks::known_divergence_attack(&model.0, centrality, s1, s2, epsilon, sel)
        .map(|a| PyModel(a.forged))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (model, epsilon, seed = 0))]
fn random_attack(model: &PyModel, epsilon: f64, seed: u64) -> PyResult<PyModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    attacks::random_attack(&model.0, epsilon, &mut rng)
        .map(PyModel)
        .map_err(err)
}

/// Canonical TOML of a configuration with defaults filled in.
#[pyfunction]
fn validate_config(text: &str) -> PyResult<String> {
    simulator::load_config(text)
        .and_then(|c| c.to_toml())
        .map_err(err)
}

/// Closed-form report and attack plan of a configuration.
#[pyfunction]
fn predict<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let sc = simulator::load_config(text)
        .and_then(|c| Scenario::build(&c))
        .map_err(err)?;
    to_py(
        py,
        &serde_json::json!({ "plan": sc.plan, "report": sc.report }),
    )
}

#[pyfunction]
#[pyo3(signature = (text, jobs = 0))]
fn run_experiment<'py>(py: Python<'py>, text: &str, jobs: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = simulator::load_config(text).map_err(err)?;
    let res = py
        .detach(|| simulator::run_experiment(&cfg, jobs))
        .map_err(err)?;
    to_py(py, &res)
}

#[pyfunction]
#[pyo3(signature = (text, jobs = 0))]
fn run_sweep<'py>(py: Python<'py>, text: &str, jobs: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = simulator::load_config(text).map_err(err)?;
    let res = py
        .detach(|| simulator::run_sweep(&cfg, jobs))
        .map_err(err)?;
    to_py(py, &res)
}

#[pymodule(name = "social_deception")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(perron_vector, m)?)?;
    m.add_function(wrap_pyfunction!(unknown_divergence_attack, m)?)?;
    m.add_function(wrap_pyfunction!(known_divergence_attack, m)?)?;
    m.add_function(wrap_pyfunction!(random_attack, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
