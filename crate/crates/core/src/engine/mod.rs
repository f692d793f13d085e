//! Method-of-steps RK4 integration of the delayed opinion systems.

mod integrate;
mod rhs;
mod trajectory;

pub use integrate::{integrate, simulate, PhaseEvent, Simulation};
pub use rhs::{rhs_distributed, rhs_pointwise, DelayWindow, DelayedView};
pub(crate) use rhs::weighted_nodes;
pub use trajectory::Trajectory;

use serde::{Deserialize, Serialize};

use crate::domain::{DelayLaw, InfluenceA, Kernel, LeaderInfluencePhi, ModelParams, State};
use crate::error::{Error, Result};

/// Interpolation used for delayed lookups between grid points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpOrder {
    Linear,
    #[default]
    CubicHermite,
}

/// Quadrature rule on the distributed-delay window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    #[default]
    Trapezoid,
    Simpson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub step: f64,
    pub interp: InterpOrder,
    pub quad_rule: QuadRule,
    /// Lower bound on quadrature nodes per delay window.
    pub quad_points_min: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 0.01,
            interp: InterpOrder::CubicHermite,
            quad_rule: QuadRule::Trapezoid,
            quad_points_min: 3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, model: &Model) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step", "must be positive and finite"));
        }
        if self.quad_points_min < 3 {
            return Err(Error::invalid("quad_points_min", "must be at least 3"));
        }
        if model.kind == ModelKind::Distributed && self.step > model.delay.tau_min() / 2.0 {
            return Err(Error::invalid(
                "step",
                format!("must be at most half the minimal delay ({})", model.delay.tau_min()),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pointwise,
    Distributed,
}

/// A fully specified delayed system (without control or initial data).
#[derive(Clone, Debug)]
pub struct Model {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub influence: InfluenceA,
    pub phi: LeaderInfluencePhi,
    pub delay: DelayLaw,
    pub kernel: Option<Kernel>,
}

impl Model {
    pub fn pointwise(params: ModelParams, influence: InfluenceA, phi: LeaderInfluencePhi, delay: DelayLaw) -> Result<Self> {
        params.verify_against(&phi, &influence)?;
        Ok(Model {
            kind: ModelKind::Pointwise,
            params,
            influence,
            phi,
            delay,
            kernel: None,
        })
    }

    pub fn distributed(
        params: ModelParams,
        influence: InfluenceA,
        phi: LeaderInfluencePhi,
        delay: DelayLaw,
        kernel: Kernel,
    ) -> Result<Self> {
        params.verify_against(&phi, &influence)?;
        if !(delay.tau_min() > 0.0) {
            return Err(Error::invalid("delay", "distributed delays need a positive lower bound"));
        }
        if kernel.tau_max() < delay.tau_max() {
            return Err(Error::invalid("kernel", "kernel must be defined on the whole delay range"));
        }
        kernel.check_support(&delay)?;
        Ok(Model {
            kind: ModelKind::Distributed,
            params,
            influence,
            phi,
            delay,
            kernel: Some(kernel),
        })
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    /// Length `τ̄` of the history the model reads.
    pub fn tau_max(&self) -> f64 {
        match &self.kernel {
            Some(k) => self.delay.tau_max().max(k.tau_max()),
            None => self.delay.tau_max(),
        }
    }

    /// Right-hand side with the control `u` for the leader.
    pub fn rhs(&self, view: &DelayedView<'_>, u: &[f64], cfg: &IntegratorConfig) -> Result<State> {
        match self.kind {
            ModelKind::Pointwise => rhs_pointwise(view, self, u),
            ModelKind::Distributed => rhs_distributed(view, self, u, cfg),
        }
    }
}
