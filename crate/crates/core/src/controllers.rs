//! Admissible leader controls: saturated consensus feedback for both delay
//! models, bang-bang steering, and the waypoint automaton that chains them.

use serde::{Deserialize, Serialize};

use crate::analysis::check_halanay;
use crate::domain::{dist, State};
use crate::engine::{weighted_nodes, DelayedView, IntegratorConfig, Model, ModelKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ControlPolicy {
    Zero,
    ConsensusPointwise,
    ConsensusDistributed,
    Steer { target: Vec<f64> },
    Waypoint(WaypointPlan),
}

impl ControlPolicy {
    /// Consensus feedback matching the model's delay type.
    pub fn consensus_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Pointwise => ControlPolicy::ConsensusPointwise,
            ModelKind::Distributed => ControlPolicy::ConsensusDistributed,
        }
    }
}

/// Chain of intermediate targets `z_0 … z_L` with spacing at most `δ/4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointPlan {
    pub waypoints: Vec<Vec<f64>>,
    pub spacing: f64,
    pub settle_radius: f64,
    pub pass_radius: f64,
    /// Trailing window for settledness checks; `None` means `τ̄`.
    pub dwell: Option<f64>,
    /// Longest time any phase may last before the run is flagged.
    pub max_phase_duration: f64,
}

impl WaypointPlan {
    pub fn target(&self) -> &[f64] {
        self.waypoints.last().expect("plan is never empty")
    }

    /// Plan consisting of the target only, re-anchored once consensus is detected.
    pub fn towards(target: Vec<f64>, delta: f64) -> Self {
        let mut p = build_waypoint_plan(&target, &target, delta);
        p.waypoints = vec![target];
        p
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        let delta = model.params.a_inner;
        if self.waypoints.is_empty() {
            return Err(Error::invalid("waypoints", "plan needs at least the target"));
        }
        if self.waypoints.iter().any(|z| z.len() != model.params.dim) {
            return Err(Error::invalid("waypoints", "waypoint dimension differs from the model"));
        }
        if self.waypoints.windows(2).any(|w| dist(&w[0], &w[1]) > delta / 4.0 * (1.0 + 1e-12)) {
            return Err(Error::invalid("waypoints", "consecutive waypoints farther apart than delta/4"));
        }
        for (v, f) in [
            (self.spacing, "spacing"),
            (self.settle_radius, "settle_radius"),
            (self.pass_radius, "pass_radius"),
            (self.max_phase_duration, "max_phase_duration"),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(f, "must be positive"));
            }
        }
        if let Some(d) = self.dwell {
            if !(d > 0.0) {
                return Err(Error::invalid("dwell", "must be positive"));
            }
        }
        let (ok, margin) = check_halanay(&model.params, &model.phi);
        if !ok {
            return Err(Error::CertificateViolation(format!(
                "phi(delta/2) > 1/(2 gamma) fails (margin {margin:.6})"
            )));
        }
        Ok(())
    }

    pub fn dwell_or(&self, tau_max: f64) -> f64 {
        self.dwell.unwrap_or(tau_max)
    }
}

/// Equally spaced points from `x_star` to `x_bar` with spacing `≤ δ/4`.
pub fn build_waypoint_plan(x_star: &[f64], x_bar: &[f64], delta: f64) -> WaypointPlan {
    let gap = dist(x_star, x_bar);
    let segments = (4.0 * gap / delta).ceil() as usize;
    let waypoints = (0..=segments)
        .map(|k| {
            if k == segments {
                return x_bar.to_vec();
            }
            let w = k as f64 / segments as f64;
            x_star.iter().zip(x_bar).map(|(a, b)| a + w * (b - a)).collect()
        })
        .collect();
    WaypointPlan {
        waypoints,
        spacing: delta / 4.0,
        settle_radius: delta / 4.0,
        pass_radius: delta / 2.0,
        dwell: None,
        max_phase_duration: 1.0e4,
    }
}

/// Index of the follower farthest from the leader, lowest index on ties.
pub fn farthest_follower(x: &State) -> (usize, f64) {
    let x0 = x.leader();
    let mut best = (1, f64::NEG_INFINITY);
    for i in 1..x.n_total() {
        let d = dist(x.agent(i), x0);
        if d > best.1 {
            best = (i, d);
        }
    }
    best
}

/// Saturation coefficient for delayed opinions `y` seen from the leader at `x0`.
fn alpha_from(y: &State, x0: &[f64], p: usize, model: &Model) -> f64 {
    let n = (y.n_total() - 1) as f64;
    let first = model.phi.value(dist(y.agent(p), x0)) / n;
    let sum: f64 = (1..y.n_total()).map(|j| dist(y.agent(j), x0)).sum();
    let second = if sum > 0.0 {
        2.0 * model.params.control_bound / (model.params.gamma * sum)
    } else {
        f64::INFINITY
    };
    0.5 * first.min(second)
}

/// `Σ_j φ(|y_j - x0|)(y_j - x0)` added into `out` with factor `scale`.
fn add_pull(y: &State, x0: &[f64], model: &Model, scale: f64, out: &mut [f64]) {
    for j in 1..y.n_total() {
        let yj = y.agent(j);
        let w = scale * model.phi.value(dist(yj, x0));
        for k in 0..out.len() {
            out[k] += w * (yj[k] - x0[k]);
        }
    }
}

/// Projects `u` onto the ball of radius `m`; only ever active at rounding level.
fn enforce_bound(mut u: Vec<f64>, m: f64) -> Vec<f64> {
    let mut norm = crate::domain::norm(&u);
    while norm > m {
        let s = m / norm * (1.0 - f64::EPSILON);
        u.iter_mut().for_each(|v| *v *= s);
        norm = crate::domain::norm(&u);
    }
    u
}

pub fn alpha_pointwise(view: &DelayedView<'_>, model: &Model) -> Result<f64> {
    let t = view.t();
    let y = view.sample(t - model.delay.tau(t))?;
    let (p, _) = farthest_follower(view.current());
    Ok(alpha_from(&y, view.current().leader(), p, model))
}

/// Saturated consensus feedback for the pointwise-delay model.
pub fn u_consensus_pointwise(view: &DelayedView<'_>, model: &Model) -> Result<Vec<f64>> {
    let t = view.t();
    let y = view.sample(t - model.delay.tau(t))?;
    let x0 = view.current().leader();
    let (p, _) = farthest_follower(view.current());
    let alpha = alpha_from(&y, x0, p, model);
    let mut u = vec![0.0; x0.len()];
    add_pull(&y, x0, model, model.params.gamma * alpha, &mut u);
    Ok(enforce_bound(u, model.params.control_bound))
}

/// `α(t; s)` with the farthest follower chosen at the current time.
pub fn alpha_distributed(view: &DelayedView<'_>, s: f64, model: &Model) -> Result<f64> {
    let y = view.sample(s)?;
    let (p, _) = farthest_follower(view.current());
    Ok(alpha_from(&y, view.current().leader(), p, model))
}

/// Saturated consensus feedback for the distributed-delay model.
pub fn u_consensus_distributed(view: &DelayedView<'_>, model: &Model, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let t = view.t();
    let nodes = weighted_nodes(model, t, cfg)?;
    let cur = view.current();
    let x0 = cur.leader();
    let (p, _) = farthest_follower(cur);
    let mut u = vec![0.0; x0.len()];
    let mut y = State::zeros(cur.n_total(), cur.dim());
    for (&w, &b) in nodes.offsets.iter().zip(&nodes.weights) {
        view.sample_into(t - w, &mut y)?;
        let alpha = alpha_from(&y, x0, p, model);
        add_pull(&y, x0, model, model.params.gamma * alpha * b / nodes.h, &mut u);
    }
    Ok(enforce_bound(u, model.params.control_bound))
}

/// Dead-band around a steering target.
pub fn steer_deadband(xi: &[f64]) -> f64 {
    1e-6 * crate::domain::norm(xi).max(1.0)
}

/// Bang-bang control of magnitude `M` towards `xi`; zero inside the dead-band.
pub fn u_steer(x0: &[f64], xi: &[f64], m: f64) -> Vec<f64> {
    let d = dist(x0, xi);
    if d <= steer_deadband(xi) {
        return vec![0.0; x0.len()];
    }
    x0.iter().zip(xi).map(|(a, b)| m * (b - a) / d).collect()
}

/// Steering control held over a step of length `h`: the magnitude drops below
/// `M` on the final approach so the step lands on `xi` instead of chattering.
pub(crate) fn u_steer_held(x0: &[f64], xi: &[f64], m: f64, h: f64) -> Vec<f64> {
    let d = dist(x0, xi);
    if d <= steer_deadband(xi) {
        return vec![0.0; x0.len()];
    }
    let mag = if h > 0.0 { m.min(d / h) } else { m };
    x0.iter().zip(xi).map(|(a, b)| mag * (b - a) / d).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", content = "waypoint", rename_all = "snake_case")]
pub enum Phase {
    Consensus,
    Steering(usize),
    Settling(usize),
    Done,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub phase: Phase,
    pub phase_entry_time: f64,
    pub current_waypoint_index: usize,
    /// Waypoints anchored at the consensus point; empty until consensus is detected.
    pub waypoints: Vec<Vec<f64>>,
    /// Set when some phase outlived `max_phase_duration`.
    pub timed_out: bool,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            phase: Phase::Consensus,
            phase_entry_time: 0.0,
            current_waypoint_index: 0,
            waypoints: Vec::new(),
            timed_out: false,
        }
    }
}

impl ControllerState {
    fn enter(&mut self, phase: Phase, t: f64) {
        if let Phase::Steering(k) | Phase::Settling(k) = phase {
            debug_assert!(k >= self.current_waypoint_index);
            self.current_waypoint_index = k;
        }
        self.phase = phase;
        self.phase_entry_time = t;
    }
}

/// Max over stored grid points in `[t - dwell, t]` of `max_{i in agents} |x_i(s) - c|`.
fn window_spread(view: &DelayedView<'_>, dwell: f64, c: &[f64], agents: std::ops::Range<usize>) -> f64 {
    let traj = view.trajectory();
    let t = view.t();
    let mut worst = agents.clone().map(|i| dist(view.current().agent(i), c)).fold(0.0, f64::max);
    for k in traj.indices_between(t - dwell, t) {
        let s = traj.state_slice(k);
        let d = traj.dim();
        for i in agents.clone() {
            worst = worst.max(dist(&s[i * d..(i + 1) * d], c));
        }
    }
    worst
}

/// Advances the waypoint automaton at time `view.t()` and returns the control
/// to hold over the next step of length `h` with the updated state.
///
/// Several transitions may fire at the same instant; the control returned
/// belongs to the phase reached last.
pub fn waypoint_controller_step(
    state: &ControllerState,
    view: &DelayedView<'_>,
    model: &Model,
    plan: &WaypointPlan,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<(Vec<f64>, ControllerState)> {
    let t = view.t();
    let x = view.current();
    let dim = x.dim();
    let n_total = x.n_total();
    let dwell = plan.dwell_or(model.delay.tau_max());
    let mut st = state.clone();
    // every pass either returns or moves strictly forward through the plan
    loop {
        match st.phase {
            Phase::Consensus => {
                let x0 = x.leader().to_vec();
                if window_spread(view, dwell, &x0, 0..n_total) <= plan.spacing {
                    let anchored = build_waypoint_plan(&x0, plan.target(), model.params.a_inner);
                    st.waypoints = anchored.waypoints;
                    let next = if st.waypoints.len() == 1 {
                        Phase::Settling(0)
                    } else {
                        Phase::Steering(1)
                    };
                    st.enter(next, t);
                    continue;
                }
                let u = match model.kind {
                    ModelKind::Pointwise => u_consensus_pointwise(view, model)?,
                    ModelKind::Distributed => u_consensus_distributed(view, model, cfg)?,
                };
                return Ok((u, finish(st, t, plan)));
            }
            Phase::Steering(k) => {
                let zk = &st.waypoints[k];
                if dist(x.leader(), zk) <= steer_deadband(zk) {
                    st.enter(Phase::Settling(k), t);
                    continue;
                }
                let u = u_steer_held(x.leader(), zk, model.params.control_bound, h);
                return Ok((u, finish(st, t, plan)));
            }
            Phase::Settling(k) => {
                let zk = st.waypoints[k].clone();
                if window_spread(view, dwell, &zk, 1..n_total) <= plan.settle_radius {
                    let next = if k + 1 == st.waypoints.len() {
                        Phase::Done
                    } else {
                        Phase::Steering(k + 1)
                    };
                    st.enter(next, t);
                    continue;
                }
                return Ok((vec![0.0; dim], finish(st, t, plan)));
            }
            Phase::Done => return Ok((vec![0.0; dim], st)),
        }
    }
}

fn finish(mut st: ControllerState, t: f64, plan: &WaypointPlan) -> ControllerState {
    if t - st.phase_entry_time > plan.max_phase_duration {
        st.timed_out = true;
    }
    st
}
