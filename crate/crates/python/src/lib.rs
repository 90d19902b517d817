//! Python bindings for the `risk_bandits` simulation library.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use core_lib::bounds::bound_overlay;
use core_lib::config::{resolve, Experiment, Overrides};
use core_lib::harness::{self, default_workers, BaiCell, BaiExperiment, InstanceSource, RmExperiment};
use core_lib::report::{bai_csv, rm_csv};
use core_lib::rm::{pilot_length, DEFAULT_GRA_ALPHA};
use core_lib::{BaiKind, BaiOptions, BoundedDistribution, Error, Objective, RmPolicyKind, SurLog, Theorem};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Usage(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn workers_or_default(workers: Option<usize>) -> usize {
    workers.filter(|&w| w >= 1).unwrap_or_else(default_workers)
}

/// Streaming mean, second raw moment and unbiased variance.
#[pyclass(name = "StreamingMoments", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyMoments(core_lib::StreamingMoments);

#[pymethods]
impl PyMoments {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    fn update(&mut self, x: f64) {
        self.0.update(x);
    }

    fn extend(&mut self, xs: Vec<f64>) {
        for x in xs {
            self.0.update(x);
        }
    }

    #[getter]
    fn count(&self) -> u64 {
        self.0.count()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    #[getter]
    fn second_raw(&self) -> f64 {
        self.0.second_raw()
    }

    /// `None` until two observations have been seen.
    #[getter]
    fn variance(&self) -> Option<f64> {
        self.0.variance()
    }
}

/// A fixed set of bounded arms with a regularizer `L`.
#[pyclass(name = "BanditInstance", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance(core_lib::BanditInstance);

#[pymethods]
impl PyInstance {
    /// Arms given as a JSON list of `{"kind": ..., "params": {...}}` objects.
    #[new]
    #[pyo3(signature = (arms_json, regularizer=1.0))]
    fn new(arms_json: &str, regularizer: f64) -> PyResult<Self> {
        let arms: Vec<BoundedDistribution> =
            serde_json::from_str(arms_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        core_lib::BanditInstance::new(arms, regularizer).map(Self).map_err(to_py)
    }

    /// Uniform arms from `(lower, upper)` pairs.
    #[staticmethod]
    #[pyo3(signature = (bounds, regularizer=1.0))]
    fn uniform(bounds: Vec<(f64, f64)>, regularizer: f64) -> PyResult<Self> {
        let arms = bounds.into_iter().map(|(a, b)| BoundedDistribution::uniform(a, b)).collect();
        core_lib::BanditInstance::new(arms, regularizer).map(Self).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn regularizer(&self) -> f64 {
        self.0.regularizer()
    }

    /// Per-arm true moments and objectives.
    fn truths<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0
            .truths()
            .iter()
            .map(|t| {
                let d = PyDict::new(py);
                d.set_item("mean", t.mean)?;
                d.set_item("variance", t.variance)?;
                d.set_item("fourth_central", t.fourth_central)?;
                d.set_item("sr", t.sr)?;
                d.set_item("rssr", t.rssr)?;
                d.set_item("sr_like", t.sr_like)?;
                Ok(d)
            })
            .collect()
    }

    /// Gaps under `"variance"`, `"sr_like"` or `"rssr"`.
    #[pyo3(signature = (objective="rssr"))]
    fn gaps(&self, objective: &str) -> PyResult<Vec<f64>> {
        let objective = match objective {
            "variance" => Objective::Variance,
            "sr_like" => Objective::SrLike,
            "rssr" => Objective::Rssr,
            other => return Err(PyValueError::new_err(format!("unknown objective '{other}'"))),
        };
        Ok(self.0.gaps(objective).values)
    }

    fn sample(&self, arm: usize, count: usize, seed: u64) -> PyResult<Vec<f64>> {
        let mut stream = core_lib::RandomStream::new(seed, 0);
        (0..count).map(|_| self.0.pull(arm, &mut stream).map_err(to_py)).collect()
    }
}

/// Regret curves of the named policies, one dict per policy.
#[pyfunction]
#[pyo3(signature = (instance, policies, horizon, replications, seed=0, workers=None))]
fn run_rm<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    policies: Vec<String>,
    horizon: u64,
    replications: u64,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let policies = policies.iter().map(|p| parse::<RmPolicyKind>(p)).collect::<PyResult<Vec<_>>>()?;
    let exp = RmExperiment {
        pilot_len: pilot_length(horizon, instance.0.k(), None).map_err(to_py)?,
        instance: instance.0.clone(),
        policies,
        horizon,
        replications,
        seed,
        gra_alpha: DEFAULT_GRA_ALPHA,
        bounds_overlay: false,
        workers: workers_or_default(workers),
        checkpoints: None,
    };
    let curves = py.detach(|| harness::run_rm(&exp)).map_err(to_py)?;
    curves
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("policy", c.policy.name())?;
            d.set_item("timesteps", c.timesteps)?;
            d.set_item("mean_regret", c.mean_regret)?;
            d.set_item("stderr", c.stderr)?;
            Ok(d)
        })
        .collect()
}

/// Empirical error probabilities of best-arm identification policies.
#[pyfunction]
#[pyo3(signature = (instance, policies, budget, replications, seed=0, workers=None))]
fn run_bai<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    policies: Vec<String>,
    budget: u64,
    replications: u64,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let policies = policies.iter().map(|p| parse::<BaiKind>(p)).collect::<PyResult<Vec<_>>>()?;
    let exp = BaiExperiment {
        cells: vec![BaiCell {
            source: InstanceSource::Fixed(instance.0.clone()),
            budget,
        }],
        policies,
        replications,
        seed,
        options: BaiOptions::default(),
        bounds_overlay: true,
        workers: workers_or_default(workers),
    };
    let reports = py.detach(|| harness::run_bai(&exp)).map_err(to_py)?;
    reports
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("policy", r.policy.name())?;
            d.set_item("budget", r.budget)?;
            d.set_item("replications", r.replications)?;
            d.set_item("error_prob", r.error_prob)?;
            d.set_item("ci_halfwidth", r.ci_halfwidth)?;
            d.set_item("bound", r.bound)?;
            Ok(d)
        })
        .collect()
}

/// Value of a regret (`t1`, `t3`, `t5`) or error (`t6`, `t7`, `t8`) bound.
#[pyfunction]
fn bound<'py>(py: Python<'py>, theorem: &str, instance: &PyInstance, n: u64) -> PyResult<Bound<'py, PyDict>> {
    let report = bound_overlay(parse::<Theorem>(theorem)?, &instance.0, n, SurLog::Logbar).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("value", report.value)?;
    d.set_item("raw", report.raw)?;
    d.set_item("terms", report.terms)?;
    Ok(d)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    core_lib::presets::names()
}

/// Runs a named preset and returns the results table as CSV text.
#[pyfunction]
#[pyo3(signature = (name, replications=None, seed=None, workers=None))]
fn run_preset(
    py: Python<'_>,
    name: &str,
    replications: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> PyResult<String> {
    let ov = Overrides {
        seed,
        replications,
        ..Overrides::default()
    };
    let resolved = resolve(None, Some(name), &ov).map_err(to_py)?;
    let experiment = resolved.build(workers_or_default(workers)).map_err(to_py)?;
    let bytes = py
        .detach(|| match &experiment {
            Experiment::Rm(exp) => rm_csv(&harness::run_rm(exp)?, exp.bounds_overlay),
            Experiment::Bai(exp) => bai_csv(&harness::run_bai(exp)?),
        })
        .map_err(to_py)?;
    String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn risk_bandits(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMoments>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(run_rm, m)?)?;
    m.add_function(wrap_pyfunction!(run_bai, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    Ok(())
}
