use std::borrow::Cow;

use crate::domain::{dist, State};
use crate::error::{Error, Result};

use super::{IntegratorConfig, Model, QuadRule, Trajectory};

/// Read access to the past of a run at time `t`, with the (possibly
/// provisional) current state supplied separately.
pub struct DelayedView<'a> {
    traj: &'a Trajectory,
    t: f64,
    current: Cow<'a, State>,
}

impl<'a> DelayedView<'a> {
    pub fn new(traj: &'a Trajectory, t: f64, current: &'a State) -> Self {
        DelayedView {
            traj,
            t,
            current: Cow::Borrowed(current),
        }
    }

    /// View at a time already covered by `traj`, taking the current state from it.
    pub fn at(traj: &'a Trajectory, t: f64) -> Result<Self> {
        let current = traj.lookup(t)?;
        Ok(DelayedView {
            traj,
            t,
            current: Cow::Owned(current),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn current(&self) -> &State {
        &self.current
    }

    pub fn trajectory(&self) -> &Trajectory {
        self.traj
    }

    /// State at `s ≤ t`.
    pub fn sample(&self, s: f64) -> Result<State> {
        let mut out = State::zeros(self.current.n_total(), self.current.dim());
        self.sample_into(s, &mut out)?;
        Ok(out)
    }

    pub(crate) fn sample_into(&self, s: f64, out: &mut State) -> Result<()> {
        if s >= self.t - 1e-12 * self.t.abs().max(1.0) {
            out.as_mut_slice().copy_from_slice(self.current.as_slice());
            return Ok(());
        }
        self.traj.sample_into(s, out.as_mut_slice(), true)
    }
}

/// Quadrature nodes on the delay window, as offsets `w = t - s ∈ [0, τ(t)]`.
#[derive(Clone, Debug)]
pub struct DelayWindow {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DelayWindow {
    pub fn new(tau_t: f64, cfg: &IntegratorConfig) -> Self {
        let mut n = cfg.quad_points_min.max(((tau_t / cfg.step) - 1e-9).ceil() as usize + 1);
        if cfg.quad_rule == QuadRule::Simpson && n.is_multiple_of(2) {
            n += 1;
        }
        let h = tau_t / (n - 1) as f64;
        let offsets = (0..n).map(|k| k as f64 * h).collect();
        let weights = match cfg.quad_rule {
            QuadRule::Trapezoid => (0..n)
                .map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h })
                .collect(),
            QuadRule::Simpson => (0..n)
                .map(|k| {
                    let c = if k == 0 || k == n - 1 {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    c * h / 3.0
                })
                .collect(),
        };
        DelayWindow { offsets, weights }
    }
}

/// Kernel-weighted quadrature nodes at time `t`, with their discrete normalizer.
pub(crate) struct WeightedNodes {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
    pub h: f64,
}

pub(crate) fn weighted_nodes(model: &Model, t: f64, cfg: &IntegratorConfig) -> Result<WeightedNodes> {
    let kernel = model.kernel().ok_or_else(|| Error::Config("distributed model requires a kernel".into()))?;
    let win = DelayWindow::new(model.delay.tau(t), cfg);
    let mut offsets = Vec::with_capacity(win.offsets.len());
    let mut weights = Vec::with_capacity(win.offsets.len());
    let mut h = 0.0;
    for (&w, &q) in win.offsets.iter().zip(&win.weights) {
        let b = q * kernel.beta(w);
        if b > 0.0 {
            offsets.push(w);
            weights.push(b);
            h += b;
        }
    }
    // normalizing by the discrete mass keeps constant integrands exact
    if !(h > 0.0) {
        return Err(Error::KernelViolation { t, h });
    }
    Ok(WeightedNodes { offsets, weights, h })
}

/// Right-hand side of the pointwise-delay system; entry 0 is the control `u`.
pub fn rhs_pointwise(view: &DelayedView<'_>, model: &Model, u: &[f64]) -> Result<State> {
    let t = view.t();
    let delayed = view.sample(t - model.delay.tau(t))?;
    let mut out = State::zeros(view.current().n_total(), view.current().dim());
    out.agent_mut(0).copy_from_slice(u);
    accumulate_agents(model, view.current(), &delayed, 1.0, &mut out);
    Ok(out)
}

/// Right-hand side of the distributed-delay system; entry 0 is the control `u`.
pub fn rhs_distributed(view: &DelayedView<'_>, model: &Model, u: &[f64], cfg: &IntegratorConfig) -> Result<State> {
    let t = view.t();
    let nodes = weighted_nodes(model, t, cfg)?;
    let cur = view.current();
    let mut out = State::zeros(cur.n_total(), cur.dim());
    let mut y = State::zeros(cur.n_total(), cur.dim());
    for (&w, &b) in nodes.offsets.iter().zip(&nodes.weights) {
        view.sample_into(t - w, &mut y)?;
        accumulate_agents(model, cur, &y, b / nodes.h, &mut out);
    }
    out.agent_mut(0).copy_from_slice(u);
    Ok(out)
}

/// Adds `scale * [(1/N) Σ_{j≠i} a(|y_j - x_i|)(y_j - x_i) + γ φ(|y_0 - x_i|)(y_0 - x_i)]`
/// to every follower `i` of `out`.
fn accumulate_agents(model: &Model, cur: &State, delayed: &State, scale: f64, out: &mut State) {
    let n = cur.n_total() - 1;
    let inv_n = scale / n as f64;
    let gamma = model.params.gamma * scale;
    let dim = cur.dim();
    for i in 1..=n {
        let xi = cur.agent(i);
        let oi = out.agent_mut(i);
        for j in 1..=n {
            if j == i {
                continue;
            }
            let yj = delayed.agent(j);
            let w = model.influence.weight(dist(yj, xi));
            if w == 0.0 {
                continue;
            }
            for k in 0..dim {
                oi[k] += inv_n * w * (yj[k] - xi[k]);
            }
        }
        let y0 = delayed.agent(0);
        let p = gamma * model.phi.value(dist(y0, xi));
        for k in 0..dim {
            oi[k] += p * (y0[k] - xi[k]);
        }
    }
}
