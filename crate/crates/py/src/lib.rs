//! Python bindings: scenario files, presets, runs and certificates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use hkdelay::analysis::{self, Certificates};
use hkdelay::domain::{LeaderInfluencePhi, ModelParams};
use hkdelay::scenario::{self, ScenarioConfig, ScenarioRun, SweepAxis};
use hkdelay::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hkdelay_py, HkdelayError, PyException);
create_exception!(hkdelay_py, ConfigError, HkdelayError);
create_exception!(hkdelay_py, NumericalError, HkdelayError);
create_exception!(hkdelay_py, CertificateError, HkdelayError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::CertificateViolation(_) => CertificateError::new_err(msg),
        e if e.is_numerical() => NumericalError::new_err(msg),
        Error::Config(_) | Error::InvalidParameter { .. } => ConfigError::new_err(msg),
        _ => HkdelayError::new_err(msg),
    }
}

/// A scenario description, equivalent to a TOML file.
#[pyclass(module = "hkdelay_py", name = "Scenario")]
struct PyScenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_toml(text).map(|cfg| Self { cfg }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ScenarioConfig::load(&path).map(|cfg| Self { cfg }).map_err(to_py)
    }

    /// `fig1` (consensus) or `fig2` (waypoint), optionally with another delay.
    #[staticmethod]
    #[pyo3(signature = (name, tau=None))]
    fn preset(name: &str, tau: Option<f64>) -> PyResult<Self> {
        scenario::preset(name, tau).map(|cfg| Self { cfg }).map_err(to_py)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.cfg.to_toml().map_err(to_py)
    }

    /// Copy with one sweep axis (`tau`, `gamma`, `control_bound`, `step`, `kernel_mass`) set.
    fn with_value(&self, axis: &str, value: f64) -> PyResult<Self> {
        let axis: SweepAxis = axis.parse().map_err(to_py)?;
        scenario::with_axis(&self.cfg, axis, value)
            .map(|cfg| Self { cfg })
            .map_err(to_py)
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.cfg.t_end
    }

    #[getter]
    fn step(&self) -> f64 {
        self.cfg.step
    }

    /// Certificates of the scenario, without simulating.
    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = scenario::emit_certificates(&self.cfg).map_err(to_py)?;
        certificates_dict(py, &c)
    }

    /// Integrates and analyzes the scenario. Releases the GIL while running.
    fn run(&self, py: Python<'_>) -> PyResult<PyRun> {
        let cfg = self.cfg.clone();
        py.detach(move || scenario::run_scenario(&cfg))
            .map(|run| PyRun { run })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(model={:?}, t_end={}, step={})",
            self.cfg.model, self.cfg.t_end, self.cfg.step
        )
    }
}

/// A finished run: trajectory on the forward grid plus its report.
#[pyclass(module = "hkdelay_py", name = "Run")]
struct PyRun {
    run: ScenarioRun,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.run.report.times.clone()
    }

    /// States as `[time][agent][coordinate]`, leader first.
    #[getter]
    fn states(&self) -> Vec<Vec<Vec<f64>>> {
        let traj = &self.run.simulation.trajectory;
        (traj.origin()..traj.len()).map(|k| traj.state(k).to_agents()).collect()
    }

    #[getter]
    fn controls(&self) -> Vec<Vec<f64>> {
        let traj = &self.run.simulation.trajectory;
        let d = traj.dim();
        (traj.origin()..traj.len())
            .map(|k| traj.control(k).map_or_else(|| vec![0.0; d], <[f64]>::to_vec))
            .collect()
    }

    #[getter]
    fn d0(&self) -> Vec<f64> {
        self.run.report.d0_series.clone()
    }

    #[getter]
    fn lyapunov(&self) -> Vec<Option<f64>> {
        self.run.report.lyapunov_series.clone()
    }

    #[getter]
    fn consensus_time(&self) -> Option<f64> {
        self.run.report.consensus_time
    }

    #[getter]
    fn fitted_rate(&self) -> Option<f64> {
        self.run.report.fitted_rate
    }

    #[getter]
    fn oscillation(&self) -> bool {
        self.run.report.oscillation
    }

    #[getter]
    fn timed_out(&self) -> bool {
        self.run.report.timed_out
    }

    fn certificates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        certificates_dict(py, &self.run.report.certificates)
    }

    /// Full report as a JSON string.
    fn report_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.run.report).map_err(|e| HkdelayError::new_err(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.report.json`; returns both paths.
    fn write(&self, dir: PathBuf, stem: &str) -> PyResult<(PathBuf, PathBuf)> {
        let files = scenario::write_run(&self.run, &dir, stem).map_err(to_py)?;
        Ok((files.csv, files.report))
    }
}

fn certificates_dict<'py>(py: Python<'py>, c: &Certificates) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("radius_r", c.radius_r)?;
    d.set_item("radius_r_star", c.radius_r_star)?;
    d.set_item("r_gamma", c.r_gamma)?;
    d.set_item("tau_max", c.tau_max)?;
    d.set_item("tau_bound_pointwise", c.tau_bound_pointwise)?;
    d.set_item("tau_bound_pointwise_star", c.tau_bound_pointwise_star)?;
    d.set_item("tau_bound_distributed", c.tau_bound_distributed)?;
    d.set_item("tau_bound_distributed_star", c.tau_bound_distributed_star)?;
    d.set_item("delay_margin", c.delay_margin)?;
    d.set_item("complies", c.complies)?;
    d.set_item("halanay_ok", c.halanay_ok)?;
    d.set_item("halanay_margin", c.halanay_margin)?;
    Ok(d)
}

fn cucker_smale_params(gamma: f64, a_inner: f64, lipschitz: Option<f64>) -> PyResult<(ModelParams, LeaderInfluencePhi)> {
    let phi = LeaderInfluencePhi::cucker_smale();
    let params = ModelParams {
        n_agents: 1,
        dim: 1,
        gamma,
        control_bound: 1.0,
        a_inner,
        a_outer: 2.0 * a_inner,
        lipschitz_phi: lipschitz.unwrap_or_else(|| phi.lipschitz()),
    };
    params.validate().map_err(to_py)?;
    Ok((params, phi))
}

/// Largest admissible delay for the default leader influence `(1 + s²)^(-3/2)`.
///
/// Pass `kernel_mass` for the distributed model.
#[pyfunction]
#[pyo3(signature = (radius, gamma=1.0, lipschitz=None, kernel_mass=None))]
fn tau_bound(radius: f64, gamma: f64, lipschitz: Option<f64>, kernel_mass: Option<f64>) -> PyResult<f64> {
    let (params, phi) = cucker_smale_params(gamma, 1.0, lipschitz)?;
    if !(radius >= 0.0) {
        return Err(PyValueError::new_err("radius must be non-negative"));
    }
    let phi_2r = phi.eval(2.0 * radius).map_err(to_py)?;
    let r_gamma = params.r_gamma(radius);
    Ok(match kernel_mass {
        None => analysis::pointwise_bound_formula(gamma, phi_2r, r_gamma),
        Some(b) if b > 0.0 => analysis::distributed_bound_formula(gamma, phi_2r, r_gamma, b),
        Some(_) => return Err(PyValueError::new_err("kernel_mass must be positive")),
    })
}

/// Settling condition for the default leader influence: `(holds, margin)`.
#[pyfunction]
#[pyo3(signature = (gamma=1.0, a_inner=1.0))]
fn halanay(gamma: f64, a_inner: f64) -> PyResult<(bool, f64)> {
    let (params, phi) = cucker_smale_params(gamma, a_inner, None)?;
    Ok(analysis::check_halanay(&params, &phi))
}

/// Runs one scenario per value in parallel; failed runs come back as exceptions.
#[pyfunction]
fn sweep(py: Python<'_>, base: &PyScenario, axis: &str, values: Vec<f64>) -> PyResult<Vec<(f64, Py<PyAny>)>> {
    let axis: SweepAxis = axis.parse().map_err(to_py)?;
    let cfg = base.cfg.clone();
    let results = py
        .detach(move || scenario::run_sweep(&cfg, axis, &values))
        .map_err(to_py)?;
    results
        .into_iter()
        .map(|(entry, run)| {
            let obj = match run {
                Ok(run) => Py::new(py, PyRun { run })?.into_any(),
                Err(e) => to_py(e).into_value(py).into_any(),
            };
            Ok((entry.value, obj))
        })
        .collect()
}

#[pymodule]
fn hkdelay_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(tau_bound, m)?)?;
    m.add_function(wrap_pyfunction!(halanay, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("HkdelayError", py.get_type::<HkdelayError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add("CertificateError", py.get_type::<CertificateError>())?;
    Ok(())
}
