//! Model parameters, interaction weights, delay laws, kernels and initial data.

mod delay;
mod history;
mod influence;
mod kernel;
mod state;

pub use delay::{DelayLaw, DelayProfile};
pub use history::InitialHistory;
pub use influence::{CutoffProfile, InfluenceA, LeaderInfluencePhi, PhiProfile, ScalarFn};
pub use kernel::{Kernel, KernelProfile};
pub use state::{dist, norm, State};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters of the controlled system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of followers `N`.
    pub n_agents: usize,
    pub dim: usize,
    /// Leader strength `γ`.
    pub gamma: f64,
    /// Admissible control bound `M`.
    pub control_bound: f64,
    /// Plateau radius `δ` of the cut-off.
    pub a_inner: f64,
    /// Support radius `r` of the cut-off.
    pub a_outer: f64,
    /// Lipschitz constant `L` of `φ`.
    pub lipschitz_phi: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::invalid("n_agents", "must be at least 1"));
        }
        if self.dim < 1 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        let positive = |v: f64, f: &'static str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(f, format!("must be positive and finite, got {v}")))
            }
        };
        positive(self.gamma, "gamma")?;
        positive(self.control_bound, "control_bound")?;
        positive(self.a_inner, "a_inner")?;
        positive(self.lipschitz_phi, "lipschitz_phi")?;
        if !(self.a_outer > self.a_inner && self.a_outer.is_finite()) {
            return Err(Error::invalid("a_outer", "must exceed a_inner"));
        }
        Ok(())
    }

    /// Checks that `lipschitz_phi` bounds the sampled slopes of `phi`.
    pub fn verify_against(&self, phi: &LeaderInfluencePhi, a: &InfluenceA) -> Result<()> {
        self.validate()?;
        // re-run the sampled check with the declared constant
        LeaderInfluencePhi::new(phi.profile().clone(), self.lipschitz_phi)?;
        if a.a_inner() != self.a_inner || a.a_outer() != self.a_outer {
            return Err(Error::invalid("influence_a", "cut-off radii disagree with the parameters"));
        }
        Ok(())
    }

    /// `R_γ = γ L R + γ + 1`.
    pub fn r_gamma(&self, radius: f64) -> f64 {
        self.gamma * self.lipschitz_phi * radius + self.gamma + 1.0
    }
}
