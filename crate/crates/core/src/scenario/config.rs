use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{ControlPolicy, WaypointPlan};
use crate::domain::{
    CutoffProfile, DelayLaw, DelayProfile, InfluenceA, InitialHistory, Kernel, KernelProfile, LeaderInfluencePhi,
    ModelParams, PhiProfile, State,
};
use crate::engine::{IntegratorConfig, InterpOrder, Model, ModelKind, QuadRule};
use crate::error::{Error, Result};

/// A complete run description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub t_end: f64,
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub influence: CutoffConfig,
    pub delay: DelayConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    pub policy: PolicyConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorOptions,
}

/// Scalar parameters; the population size and dimension may be implied by the initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub gamma: f64,
    pub control_bound: f64,
    pub a_inner: f64,
    pub a_outer: f64,
    /// Defaults to the exact constant of the chosen `phi` when it has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_phi: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            n_agents: None,
            dim: None,
            gamma: 1.0,
            control_bound: 1.0,
            a_inner: 1.0,
            a_outer: 2.0,
            lipschitz_phi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    CuckerSmale {
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    Exponential {
        rate: f64,
    },
    Constant {},
}

fn default_exponent() -> f64 {
    1.5
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig::CuckerSmale { exponent: 1.5 }
    }
}

impl PhiConfig {
    fn profile(&self) -> PhiProfile {
        match *self {
            PhiConfig::CuckerSmale { exponent } => PhiProfile::CuckerSmale { exponent },
            PhiConfig::Exponential { rate } => PhiProfile::Exponential { rate },
            PhiConfig::Constant {} => PhiProfile::Constant,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffConfig {
    #[default]
    LinearRamp,
    SmoothStep,
}

// unknown keys are rejected by the flattened profile
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayConfig {
    #[serde(flatten)]
    pub profile: DelayProfile,
    /// History length; defaults to the supremum of the profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub profile: KernelProfile,
    /// Rescales the kernel so its total mass equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Kernel support; defaults to the history length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
// unit variants would silently accept stray keys, hence the empty braces
pub enum PolicyConfig {
    Zero {},
    /// Consensus feedback of the model's delay type.
    Consensus {},
    Steer {
        target: Vec<f64>,
    },
    Waypoint {
        target: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        settle_radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dwell: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_phase_duration: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Leader at 0, follower `i` frozen at `(-1)^i i / 50` (50 followers, d = 1).
    Section6 {},
    /// Constant history; first row is the leader.
    Constants { agents: Vec<Vec<f64>> },
    /// Piecewise-linear history; `states[k]` lists every agent at `times[k]`.
    Sampled { times: Vec<f64>, states: Vec<Vec<Vec<f64>>> },
    /// Constant history with followers uniform in the cube `center ± spread`,
    /// leader at `center`. Uses the scenario seed.
    Random {
        spread: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub interp: InterpOrder,
    pub quad_rule: QuadRule,
    pub quad_points_min: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorOptions {
            interp: d.interp,
            quad_rule: d.quad_rule,
            quad_points_min: d.quad_points_min,
        }
    }
}

/// The validated objects a scenario expands to.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub model: Model,
    pub history: InitialHistory,
    pub policy: ControlPolicy,
    pub integrator: IntegratorConfig,
    pub t_end: f64,
}

pub const SECTION6_AGENTS: usize = 50;

/// Opinions of the alternating 50-agent population, leader first.
pub fn section6_state() -> State {
    let mut agents = vec![vec![0.0]];
    agents.extend((1..=SECTION6_AGENTS).map(|i| {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        vec![sign * i as f64 / SECTION6_AGENTS as f64]
    }));
    State::from_agents(&agents).expect("rows have equal length")
}

// Numerical and certificate errors keep their class so callers can tell them apart.
fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::CertificateViolation(_) => e,
        e if e.is_numerical() => e,
        other => Error::Config(other.to_string()),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn history(&self) -> Result<InitialHistory> {
        match &self.initial {
            InitialConfig::Section6 {} => Ok(InitialHistory::constant(section6_state())),
            InitialConfig::Constants { agents } => Ok(InitialHistory::constant(State::from_agents(agents)?)),
            InitialConfig::Sampled { times, states } => {
                let states = states.iter().map(|s| State::from_agents(s)).collect::<Result<Vec<_>>>()?;
                InitialHistory::sampled(times.clone(), states)
            }
            InitialConfig::Random { spread, center } => {
                let (n, d) = match (self.params.n_agents, self.params.dim) {
                    (Some(n), Some(d)) => (n, d),
                    _ => return Err(Error::Config("random initial data needs params.n_agents and params.dim".into())),
                };
                if !(*spread >= 0.0) {
                    return Err(Error::Config("initial.spread must be non-negative".into()));
                }
                let c = center.clone().unwrap_or_else(|| vec![0.0; d]);
                if c.len() != d {
                    return Err(Error::Config("initial.center has the wrong dimension".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut agents = vec![c.clone()];
                for _ in 0..n {
                    agents.push(c.iter().map(|x| x + spread * rng.random_range(-1.0..=1.0)).collect());
                }
                Ok(InitialHistory::constant(State::from_agents(&agents)?))
            }
        }
    }

    /// Validates every component and builds the model, data and policy.
    pub fn resolve(&self) -> Result<Resolved> {
        self.resolve_inner().map_err(cfg_err)
    }

    fn resolve_inner(&self) -> Result<Resolved> {
        let history = self.history()?;
        let (n, d) = (history.n_total() - 1, history.dim());
        if n == 0 {
            return Err(Error::Config("initial data needs at least one follower".into()));
        }
        if self.params.n_agents.is_some_and(|v| v != n) || self.params.dim.is_some_and(|v| v != d) {
            return Err(Error::Config(format!(
                "params.n_agents/dim disagree with the initial data ({n} followers, dimension {d})"
            )));
        }
        let profile = self.phi.profile();
        let lipschitz = match (self.params.lipschitz_phi, profile.exact_lipschitz()) {
            (Some(l), _) => l,
            (None, Some(l)) if l > 0.0 => l * (1.0 + 1e-12),
            (None, _) => 1.0,
        };
        let phi = LeaderInfluencePhi::new(profile, lipschitz)?;
        let cutoff = match self.influence {
            CutoffConfig::LinearRamp => CutoffProfile::LinearRamp,
            CutoffConfig::SmoothStep => CutoffProfile::SmoothStep,
        };
        let influence = InfluenceA::new(self.params.a_inner, self.params.a_outer, cutoff)?;
        let params = ModelParams {
            n_agents: n,
            dim: d,
            gamma: self.params.gamma,
            control_bound: self.params.control_bound,
            a_inner: self.params.a_inner,
            a_outer: self.params.a_outer,
            lipschitz_phi: lipschitz,
        };
        let delay = match self.delay.tau_max {
            Some(t) => DelayLaw::bounded(self.delay.profile.clone(), t)?,
            None => DelayLaw::new(self.delay.profile.clone())?,
        };
        let model = match self.model {
            ModelKind::Pointwise => {
                if self.kernel.is_some() {
                    return Err(Error::Config("kernel given for a pointwise model".into()));
                }
                Model::pointwise(params, influence, phi, delay)?
            }
            ModelKind::Distributed => {
                let kc = self
                    .kernel
                    .as_ref()
                    .ok_or_else(|| Error::Config("distributed model needs a [kernel] table".into()))?;
                let mut kernel = Kernel::new(kc.profile.clone(), kc.tau_max.unwrap_or(delay.tau_max()))?;
                if let Some(b) = kc.mass {
                    kernel = kernel.scaled(b / kernel.b_total())?;
                }
                Model::distributed(params, influence, phi, delay, kernel)?
            }
        };
        let policy = match &self.policy {
            PolicyConfig::Zero {} => ControlPolicy::Zero,
            PolicyConfig::Consensus {} => ControlPolicy::consensus_for(self.model),
            PolicyConfig::Steer { target } => ControlPolicy::Steer { target: target.clone() },
            PolicyConfig::Waypoint {
                target,
                settle_radius,
                dwell,
                max_phase_duration,
            } => {
                let mut plan = WaypointPlan::towards(target.clone(), model.params.a_inner);
                if let Some(r) = settle_radius {
                    plan.settle_radius = *r;
                }
                plan.dwell = *dwell;
                if let Some(m) = max_phase_duration {
                    plan.max_phase_duration = *m;
                }
                plan.validate(&model)?;
                ControlPolicy::Waypoint(plan)
            }
        };
        let integrator = IntegratorConfig {
            step: self.step,
            interp: self.integrator.interp,
            quad_rule: self.integrator.quad_rule,
            quad_points_min: self.integrator.quad_points_min,
        };
        integrator.validate(&model)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be finite and non-negative".into()));
        }
        Ok(Resolved {
            model,
            history,
            policy,
            integrator,
            t_end: self.t_end,
        })
    }
}
