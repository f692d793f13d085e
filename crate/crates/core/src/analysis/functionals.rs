//! Window integrals of the speed bound `g = max_j |x_j'| + |x_0'|` over the past.

use rayon::prelude::*;

use crate::domain::{norm, Kernel};
use crate::engine::Trajectory;
use crate::error::{Error, Result};

use super::d0_state;

fn speed(traj: &Trajectory, k: usize) -> f64 {
    let f = traj.deriv_slice(k).expect("derivatives are stored at every grid point");
    let d = traj.dim();
    let followers = (1..traj.n_total()).map(|j| norm(&f[j * d..(j + 1) * d])).fold(0.0, f64::max);
    followers + norm(&f[..d])
}

fn speed_at(traj: &Trajectory, s: f64) -> f64 {
    let times = traj.times();
    let k = times.partition_point(|&x| x <= s).clamp(1, times.len() - 1) - 1;
    let (t0, t1) = (times[k], times[k + 1]);
    let w = ((s - t0) / (t1 - t0)).clamp(0.0, 1.0);
    (1.0 - w) * speed(traj, k) + w * speed(traj, k + 1)
}

/// Speed samples on `[t - len, t]` as `(w, g(t - w))` with `w` increasing from 0.
/// Off-grid endpoints are linearly interpolated.
fn window(traj: &Trajectory, t: f64, len: f64) -> Result<Vec<(f64, f64)>> {
    if t < len - 1e-9 * len.max(1.0) {
        return Err(Error::Domain(format!("window functionals need t >= {len}, got {t}")));
    }
    let hi = traj.t_last();
    if t > hi + 1e-12 * hi.abs().max(1.0) {
        return Err(Error::OutOfRange { s: t, lo: traj.t_start(), hi });
    }
    let a = (t - len).max(traj.t_start());
    let times = traj.times();
    let tol = 1e-9 * (times[1] - times[0]).abs();
    let range = traj.indices_between(a, t);
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(range.len() + 2);
    if range.is_empty() || (times[range.start] - a).abs() > tol {
        nodes.push((a, speed_at(traj, a)));
    }
    nodes.extend(range.clone().map(|k| (times[k], speed(traj, k))));
    if range.is_empty() || (times[range.end - 1] - t).abs() > tol {
        nodes.push((t, speed_at(traj, t)));
    }
    Ok(nodes.into_iter().rev().map(|(s, g)| ((t - s).max(0.0), g)).collect())
}

/// Cumulative trapezoid integral of `f` over the nodes.
fn cumulative(nodes: &[(f64, f64)], f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len());
    out.push(0.0);
    for k in 1..nodes.len() {
        let dw = nodes[k].0 - nodes[k - 1].0;
        let prev = out[k - 1];
        out.push(prev + 0.5 * dw * (f(k - 1) + f(k)));
    }
    out
}

fn trapezoid(nodes: &[(f64, f64)], f: impl Fn(usize) -> f64) -> f64 {
    *cumulative(nodes, f).last().unwrap_or(&0.0)
}

/// `∫_{t-τ̄}^t g(s) ds`.
pub fn sigma_tau(traj: &Trajectory, t: f64) -> Result<f64> {
    let nodes = window(traj, t, traj.tau_max())?;
    Ok(trapezoid(&nodes, |k| nodes[k].1))
}

/// `(1/h(t)) ∫_{t-τ̄}^t β(t-s) ∫_s^t g dσ ds` with `h(t) = ∫_0^{τ(t)} β`.
pub fn lambda_tau(traj: &Trajectory, t: f64, kernel: &Kernel, delay: &crate::domain::DelayLaw) -> Result<f64> {
    let h = kernel.eval_h(delay, t)?;
    let nodes = window(traj, t, kernel.tau_max())?;
    let inner = cumulative(&nodes, |k| nodes[k].1);
    Ok(trapezoid(&nodes, |k| kernel.beta(nodes[k].0) * inner[k]) / h)
}

fn current_d0(traj: &Trajectory, t: f64) -> Result<f64> {
    Ok(d0_state(&traj.lookup(t)?).0)
}

/// `d0(t) + weight ∫_{t-τ̄}^t e^{-(t-s)} ∫_s^t g dσ ds`.
pub fn lyapunov_pointwise(traj: &Trajectory, t: f64, weight: f64) -> Result<f64> {
    let nodes = window(traj, t, traj.tau_max())?;
    let inner = cumulative(&nodes, |k| nodes[k].1);
    let tail = trapezoid(&nodes, |k| (-nodes[k].0).exp() * inner[k]);
    Ok(current_d0(traj, t)? + weight * tail)
}

/// `d0(t) + weight ∫_0^{τ̄} β(s) ∫_{t-s}^t e^{-(t-σ)} ∫_σ^t g dρ dσ ds`.
pub fn lyapunov_distributed(traj: &Trajectory, t: f64, weight: f64, kernel: &Kernel) -> Result<f64> {
    let nodes = window(traj, t, kernel.tau_max())?;
    let inner = cumulative(&nodes, |k| nodes[k].1);
    let middle = cumulative(&nodes, |k| (-nodes[k].0).exp() * inner[k]);
    let tail = trapezoid(&nodes, |k| kernel.beta(nodes[k].0) * middle[k]);
    Ok(current_d0(traj, t)? + weight * tail)
}

/// Grid times `t ≥ len` at which the window functionals are defined.
fn eligible(traj: &Trajectory, len: f64) -> Vec<f64> {
    let start = traj.indices_between(len, f64::INFINITY).start;
    traj.times()[start.max(traj.origin())..].to_vec()
}

pub fn lyapunov_pointwise_series(traj: &Trajectory, weight: f64) -> Result<Vec<(f64, f64)>> {
    eligible(traj, traj.tau_max())
        .into_par_iter()
        .map(|t| Ok((t, lyapunov_pointwise(traj, t, weight)?)))
        .collect()
}

pub fn lyapunov_distributed_series(traj: &Trajectory, weight: f64, kernel: &Kernel) -> Result<Vec<(f64, f64)>> {
    eligible(traj, kernel.tau_max())
        .into_par_iter()
        .map(|t| Ok((t, lyapunov_distributed(traj, t, weight, kernel)?)))
        .collect()
}
