use serde::{Deserialize, Serialize};

use crate::controllers::{
    u_consensus_distributed, u_consensus_pointwise, u_steer_held, waypoint_controller_step, ControlPolicy,
    ControllerState, Phase,
};
use crate::domain::{InitialHistory, State};
use crate::error::{Error, Result};

use super::{DelayedView, IntegratorConfig, Model, Trajectory};

/// Time at which the waypoint automaton entered a phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub t: f64,
    pub phase: Phase,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub trajectory: Trajectory,
    /// Phase transitions of the waypoint automaton (empty for other policies).
    pub phases: Vec<PhaseEvent>,
    /// Final automaton state for waypoint runs.
    pub controller: Option<ControllerState>,
}

/// How the control behaves inside one RK4 step.
enum StepControl {
    /// Feedback re-evaluated at every stage.
    ConsensusPointwise,
    ConsensusDistributed,
    /// Value chosen at the grid point and held over the step.
    Held(Vec<f64>),
}

fn consensus(mode: &StepControl, view: &DelayedView<'_>, model: &Model, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    match mode {
        StepControl::ConsensusPointwise => u_consensus_pointwise(view, model),
        StepControl::ConsensusDistributed => u_consensus_distributed(view, model, cfg),
        StepControl::Held(u) => Ok(u.clone()),
    }
}

/// Integrates on `[0, t_end]` and returns only the trajectory.
pub fn integrate(
    model: &Model,
    policy: &ControlPolicy,
    history: InitialHistory,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    simulate(model, policy, history, t_end, cfg).map(|s| s.trajectory)
}

/// Classical RK4 with fixed step on `[0, t_end]`; delayed values come from the
/// dense output of the steps already taken.
pub fn simulate(
    model: &Model,
    policy: &ControlPolicy,
    history: InitialHistory,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Simulation> {
    cfg.validate(model)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("t_end", "must be finite and non-negative"));
    }
    let p = &model.params;
    if history.n_total() != p.n_agents + 1 || history.dim() != p.dim {
        return Err(Error::invalid(
            "history",
            format!(
                "expected {} agents in dimension {}, got {} in dimension {}",
                p.n_agents + 1,
                p.dim,
                history.n_total(),
                history.dim()
            ),
        ));
    }
    let mut auto = match policy {
        ControlPolicy::Waypoint(plan) => {
            plan.validate(model)?;
            Some(ControllerState::default())
        }
        ControlPolicy::Steer { target } if target.len() != p.dim => {
            return Err(Error::invalid("target", "dimension differs from the model"));
        }
        _ => None,
    };
    let mut phases = Vec::new();
    if let Some(st) = &auto {
        phases.push(PhaseEvent { t: 0.0, phase: st.phase });
    }

    let step = cfg.step;
    let mut traj = Trajectory::from_history(history, model.tau_max(), step, cfg.interp)?;
    let n_steps = ((t_end / step) - 1e-9).ceil().max(0.0) as usize;
    let mut x = traj.final_state();
    let mut t = 0.0;
    let width = x.as_slice().len();
    let mut stage = State::zeros(x.n_total(), x.dim());

    for n in 0..=n_steps {
        let t_next = if n + 1 >= n_steps { t_end } else { (n + 1) as f64 * step };
        let h = t_next - t;
        let view = DelayedView::new(&traj, t, &x);
        let mode = match policy {
            ControlPolicy::Zero => StepControl::Held(vec![0.0; p.dim]),
            ControlPolicy::ConsensusPointwise => StepControl::ConsensusPointwise,
            ControlPolicy::ConsensusDistributed => StepControl::ConsensusDistributed,
            ControlPolicy::Steer { target } => StepControl::Held(u_steer_held(x.leader(), target, p.control_bound, h)),
            ControlPolicy::Waypoint(plan) => {
                let st = auto.as_mut().expect("automaton state exists for waypoint runs");
                let (u, next) = waypoint_controller_step(st, &view, model, plan, cfg, h)?;
                if next.phase != st.phase {
                    phases.push(PhaseEvent { t, phase: next.phase });
                }
                *st = next;
                StepControl::Held(u)
            }
        };
        let u1 = consensus(&mode, &view, model, cfg)?;
        let k1 = model.rhs(&view, &u1, cfg)?;
        drop(view);
        traj.push_deriv(k1.as_slice(), &u1);
        if n == n_steps {
            break;
        }

        let mut eval = |dt: f64, k: &State, c: f64| -> Result<State> {
            for i in 0..width {
                stage.as_mut_slice()[i] = x.as_slice()[i] + c * k.as_slice()[i];
            }
            let view = DelayedView::new(&traj, t + dt, &stage);
            let u = consensus(&mode, &view, model, cfg)?;
            model.rhs(&view, &u, cfg)
        };
        let k2 = eval(0.5 * h, &k1, 0.5 * h)?;
        let k3 = eval(0.5 * h, &k2, 0.5 * h)?;
        let k4 = eval(h, &k3, h)?;
        {
            let xs = x.as_mut_slice();
            let (a, b, c, d) = (k1.as_slice(), k2.as_slice(), k3.as_slice(), k4.as_slice());
            for i in 0..width {
                xs[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
            }
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        traj.push_state(t_next, &x);
        t = t_next;
    }
    Ok(Simulation {
        trajectory: traj,
        phases,
        controller: auto,
    })
}
