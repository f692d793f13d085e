//! Scenario files, the built-in presets, sweeps and run outputs.

mod config;
mod output;

pub use config::{
    section6_state, CutoffConfig, DelayConfig, InitialConfig, IntegratorOptions, KernelConfig, ParamsConfig,
    PhiConfig, PolicyConfig, Resolved, ScenarioConfig, SECTION6_AGENTS,
};
pub use output::{render_certificates, write_report_json, write_run, write_trajectory_csv, RunFiles};

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, Certificates, RunReport};
use crate::domain::DelayProfile;
use crate::engine::{simulate, ModelKind, Simulation};
use crate::error::{Error, Result};

/// A finished run with its inputs and diagnostics.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub resolved: Resolved,
    pub simulation: Simulation,
    pub report: RunReport,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let resolved = cfg.resolve()?;
    let simulation = simulate(
        &resolved.model,
        &resolved.policy,
        resolved.history.clone(),
        resolved.t_end,
        &resolved.integrator,
    )?;
    let report = analyze(&resolved.model, &resolved.history, &simulation)?;
    Ok(ScenarioRun {
        resolved,
        simulation,
        report,
    })
}

/// Evaluates all certificates without simulating.
pub fn emit_certificates(cfg: &ScenarioConfig) -> Result<Certificates> {
    let r = cfg.resolve()?;
    Certificates::evaluate(&r.model, &r.history)
}

/// Default step of the built-in presets.
pub fn section6_step(tau: f64) -> f64 {
    if tau <= 1.0 {
        0.01
    } else {
        0.05
    }
}

/// Horizon of the consensus preset: long enough for `d0 < 1e-3` at every
/// delay up to 25.
pub fn fig1_horizon(tau: f64) -> f64 {
    if tau <= 1.0 {
        100.0
    } else {
        (40.0 * tau).max(400.0)
    }
}

fn section6_base(tau: f64, policy: PolicyConfig, t_end: f64) -> ScenarioConfig {
    ScenarioConfig {
        model: ModelKind::Pointwise,
        t_end,
        step: section6_step(tau),
        seed: 0,
        params: ParamsConfig {
            n_agents: Some(SECTION6_AGENTS),
            dim: Some(1),
            ..ParamsConfig::default()
        },
        phi: PhiConfig::CuckerSmale { exponent: 1.5 },
        influence: CutoffConfig::LinearRamp,
        delay: DelayConfig {
            profile: DelayProfile::Constant { value: tau },
            tau_max: None,
        },
        kernel: None,
        policy,
        initial: InitialConfig::Section6 {},
        integrator: IntegratorOptions::default(),
    }
}

/// Consensus control of the 50-agent population with constant delay `tau`.
pub fn fig1(tau: f64) -> ScenarioConfig {
    section6_base(tau, PolicyConfig::Consensus {}, fig1_horizon(tau))
}

pub const FIG2_TARGET: f64 = 4.0;
pub const FIG2_HORIZON: f64 = 80.0;

/// Waypoint control of the 50-agent population towards 4 with delay 1.
pub fn fig2() -> ScenarioConfig {
    section6_base(
        1.0,
        PolicyConfig::Waypoint {
            target: vec![FIG2_TARGET],
            settle_radius: None,
            dwell: None,
            max_phase_duration: None,
        },
        FIG2_HORIZON,
    )
}

pub fn preset(name: &str, tau: Option<f64>) -> Result<ScenarioConfig> {
    match name {
        "fig1" => Ok(fig1(tau.unwrap_or(1.0))),
        "fig2" => {
            let mut cfg = fig2();
            if let Some(t) = tau {
                cfg.delay.profile = DelayProfile::Constant { value: t };
                cfg.step = section6_step(t);
            }
            Ok(cfg)
        }
        other => Err(Error::Config(format!("unknown preset `{other}` (expected fig1 or fig2)"))),
    }
}

/// Scalar a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Constant delay value.
    Tau,
    Gamma,
    /// Control bound `M`.
    ControlBound,
    Step,
    /// Total kernel mass `B`.
    KernelMass,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepAxis::Tau),
            "gamma" => Ok(SweepAxis::Gamma),
            "control_bound" | "M" => Ok(SweepAxis::ControlBound),
            "step" => Ok(SweepAxis::Step),
            "kernel_mass" | "B" => Ok(SweepAxis::KernelMass),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected tau, gamma, control_bound, step or kernel_mass)"
            ))),
        }
    }
}

/// Copy of `base` with one scalar replaced.
pub fn with_axis(base: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Tau => match cfg.delay.profile {
            DelayProfile::Constant { .. } => {
                cfg.delay.profile = DelayProfile::Constant { value };
                cfg.delay.tau_max = cfg.delay.tau_max.filter(|&m| m >= value);
            }
            _ => return Err(Error::Config("the tau axis needs a constant delay".into())),
        },
        SweepAxis::Gamma => cfg.params.gamma = value,
        SweepAxis::ControlBound => cfg.params.control_bound = value,
        SweepAxis::Step => cfg.step = value,
        SweepAxis::KernelMass => match cfg.kernel.as_mut() {
            Some(k) => k.mass = Some(value),
            None => return Err(Error::Config("the kernel_mass axis needs a distributed model".into())),
        },
    }
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    #[serde(flatten)]
    pub outcome: SweepOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutcome {
    Report(Box<RunReport>),
    Error(String),
}

/// One independent run per value, in parallel; results keep the order of `values`.
/// A failing run yields an error entry and does not stop the others.
pub fn run_sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<(SweepEntry, Result<ScenarioRun>)>> {
    let cfgs = values
        .iter()
        .map(|&v| with_axis(base, axis, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(cfgs
        .par_iter()
        .zip(values.par_iter())
        .map(|(cfg, &value)| {
            let run = run_scenario(cfg);
            let outcome = match &run {
                Ok(r) => SweepOutcome::Report(Box::new(r.report.clone())),
                Err(e) => SweepOutcome::Error(e.to_string()),
            };
            (SweepEntry { value, outcome }, run)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_parameters() {
        let r = fig1(1.0).resolve().unwrap();
        assert_eq!(r.model.params.n_agents, 50);
        assert_eq!(r.model.params.dim, 1);
        assert_eq!((r.model.params.a_inner, r.model.params.a_outer, r.model.params.gamma), (1.0, 2.0, 1.0));
        assert_eq!(r.integrator.step, 0.01);
        assert_eq!(fig1(25.0).step, 0.05);
        let x = r.history.at_zero();
        assert_eq!(x.agent(1)[0], -0.02);
        assert_eq!(x.agent(50)[0], 1.0);
        assert_eq!(crate::analysis::d0_state(&x), (1.0, 50));
        assert!(fig2().resolve().is_ok());
        assert!(preset("fig3", None).is_err());
    }

    #[test]
    fn toml_round_trip() {
        for cfg in [fig1(10.0), fig2()] {
            let text = cfg.to_toml().unwrap();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let good = r#"
model = "distributed"
t_end = 1.0
step = 0.05
[delay]
kind = "constant"
value = 0.5
[kernel]
kind = "uniform"
value = 1.0
[policy]
kind = "consensus"
[initial]
kind = "constants"
agents = [[0.0], [1.0], [-1.0]]
"#;
        let cfg = ScenarioConfig::from_toml(good).unwrap();
        assert!(cfg.resolve().is_ok());
        for bad in [
            good.replace("t_end", "t_final"),
            good.replace("value = 0.5", "value = 0.5\nwiggle = 1"),
            good.replace("kind = \"uniform\"", "kind = \"uniform\"\nwidth = 2"),
            good.replace("kind = \"consensus\"", "kind = \"consensus\"\ngain = 2"),
        ] {
            assert!(matches!(ScenarioConfig::from_toml(&bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn sweep_axes_apply() {
        let base = fig1(1.0);
        assert_eq!(with_axis(&base, SweepAxis::Gamma, 2.0).unwrap().params.gamma, 2.0);
        assert!(with_axis(&base, SweepAxis::KernelMass, 2.0).is_err());
        assert_eq!("M".parse::<SweepAxis>().unwrap(), SweepAxis::ControlBound);
        assert!("omega".parse::<SweepAxis>().is_err());
    }
}
