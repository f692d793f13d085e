use serde::{Deserialize, Serialize};

use crate::domain::{norm, InitialHistory};
use crate::engine::{Model, ModelKind, PhaseEvent, Simulation};
use crate::error::Result;

use super::{
    d0_series, default_lyapunov_weight, fit_decay_rate, lyapunov_distributed_series, lyapunov_pointwise_series,
    Certificates,
};

/// Everything derived from one run, sampled on its forward time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub times: Vec<f64>,
    pub d0_series: Vec<f64>,
    /// Defined from `t = τ̄` on and only when a feasible weight exists.
    pub lyapunov_series: Vec<Option<f64>>,
    pub lyapunov_weight: Option<f64>,
    pub control_norm_series: Vec<f64>,
    /// Exponential rate fitted to `d0` over the second half of the run.
    pub fitted_rate: Option<f64>,
    pub certificates: Certificates,
    pub consensus_threshold: f64,
    pub consensus_time: Option<f64>,
    pub oscillation: bool,
    pub phases: Vec<PhaseEvent>,
    pub timed_out: bool,
}

impl RunReport {
    pub fn consensus_reached(&self) -> bool {
        self.consensus_time.is_some()
    }
}

/// First time with `d0 < threshold`.
pub fn consensus_time(times: &[f64], d0: &[f64], threshold: f64) -> Option<f64> {
    times.iter().zip(d0).find(|(_, &v)| v < threshold).map(|(&t, _)| t)
}

/// Relative rebound above the running minimum that counts as an oscillation.
pub const REBOUND: f64 = 0.1;

/// True when the series climbs more than [`REBOUND`] above its running minimum
/// at a level of at least `floor`. Small wiggles below `floor` are ignored.
pub fn oscillation_flag(series: &[f64], floor: f64) -> bool {
    let mut low = f64::INFINITY;
    for &v in series {
        if v >= floor && v > (1.0 + REBOUND) * low {
            return true;
        }
        low = low.min(v);
    }
    false
}

/// Decay rate of `d0` over the second half of the stretch where it stays
/// above rounding noise.
fn fit_rate(times: &[f64], d0: &[f64]) -> Option<f64> {
    let peak = d0.iter().copied().fold(0.0, f64::max);
    let last = d0.iter().rposition(|&v| v > 1e-12 * peak)?;
    let t_last = times[last];
    fit_decay_rate(&times[..=last], &d0[..=last], 0.5 * t_last, t_last).ok()
}

pub fn analyze(model: &Model, history: &InitialHistory, sim: &Simulation) -> Result<RunReport> {
    let traj = &sim.trajectory;
    let certificates = Certificates::evaluate(model, history)?;
    let times = traj.forward_times().to_vec();
    let d0 = d0_series(traj);
    let control_norm_series = (traj.origin()..traj.len())
        .map(|k| traj.control(k).map_or(0.0, norm))
        .collect();

    let r = certificates.radius_r;
    let mass = model.kernel().map(|k| k.b_total());
    let lyapunov_weight = default_lyapunov_weight(&model.params, &model.phi, r, model.delay.tau_max(), mass);
    let mut lyapunov_series = vec![None; times.len()];
    if let Some(w) = lyapunov_weight {
        let series = match (model.kind, model.kernel()) {
            (ModelKind::Distributed, Some(k)) => lyapunov_distributed_series(traj, w, k)?,
            _ => lyapunov_pointwise_series(traj, w)?,
        };
        let offset = times.len() - series.len();
        for (slot, (_, v)) in lyapunov_series[offset..].iter_mut().zip(series) {
            *slot = Some(v);
        }
    }

    let fitted_rate = fit_rate(&times, &d0);
    let consensus_threshold = 1e-3 * r.max(1.0);
    Ok(RunReport {
        consensus_time: consensus_time(&times, &d0, consensus_threshold),
        oscillation: oscillation_flag(&d0, consensus_threshold),
        times,
        d0_series: d0,
        lyapunov_series,
        lyapunov_weight,
        control_norm_series,
        fitted_rate,
        certificates,
        consensus_threshold,
        phases: sim.phases.clone(),
        timed_out: sim.controller.as_ref().is_some_and(|c| c.timed_out),
    })
}
