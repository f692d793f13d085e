//! Diagnostics, certificates, Lyapunov functionals and decay-rate fits.

mod ball;
mod functionals;
mod report;

pub use ball::{smallest_enclosing_ball, Ball};
pub use functionals::{
    lambda_tau, lyapunov_distributed, lyapunov_distributed_series, lyapunov_pointwise, lyapunov_pointwise_series,
    sigma_tau,
};
pub use report::{analyze, consensus_time, oscillation_flag, RunReport, REBOUND};

use serde::{Deserialize, Serialize};

use crate::controllers::farthest_follower;
use crate::domain::{norm, InitialHistory, Kernel, LeaderInfluencePhi, ModelParams, State};
use crate::engine::{Model, Trajectory};
use crate::error::{Error, Result};

/// Largest follower-leader distance and the (lowest) index attaining it.
pub fn d0_state(x: &State) -> (f64, usize) {
    let (i, d) = farthest_follower(x);
    (d, i)
}

/// `d0` at time `t`, interpolated between grid points.
pub fn d0(traj: &Trajectory, t: f64) -> Result<(f64, usize)> {
    Ok(d0_state(&traj.lookup(t)?))
}

/// `d0` at every stored time from `t = 0` on.
pub fn d0_series(traj: &Trajectory) -> Vec<f64> {
    (traj.origin()..traj.len())
        .map(|k| d0_state(&traj.state(k)).0)
        .collect()
}

/// Sup-norm radius of the history on `[-τ̄, 0]`, leader included.
pub fn radius_r(history: &InitialHistory, tau_max: f64) -> f64 {
    history
        .samples_in(-tau_max)
        .iter()
        .flat_map(|s| (0..s.n_total()).map(move |i| norm(s.agent(i))))
        .fold(0.0, f64::max)
}

/// Smallest-enclosing-ball radius of the follower history on `[-tau0, 0]`.
pub fn radius_r_star(history: &InitialHistory, tau0: f64) -> f64 {
    radius_r_star_ball(history, tau0).radius
}

pub fn radius_r_star_ball(history: &InitialHistory, tau0: f64) -> Ball {
    let pts: Vec<Vec<f64>> = history
        .samples_in(-tau0)
        .iter()
        .flat_map(|s| (1..s.n_total()).map(move |i| s.agent(i).to_vec()))
        .collect();
    smallest_enclosing_ball(&pts)
}

/// Right-hand side of the pointwise delay bound, `ln(1 + γφ(2R)/(γ(1+2γ)φ(2R) + 4(1+γ)R_γ))`.
pub fn pointwise_bound_formula(gamma: f64, phi_2r: f64, r_gamma: f64) -> f64 {
    let q = gamma * phi_2r / (gamma * (1.0 + 2.0 * gamma) * phi_2r + 4.0 * (1.0 + gamma) * r_gamma);
    q.ln_1p()
}

/// Right-hand side of the distributed delay bound for kernel mass `b`.
pub fn distributed_bound_formula(gamma: f64, phi_2r: f64, r_gamma: f64, b: f64) -> f64 {
    let q = gamma * phi_2r / (4.0 * r_gamma * b * (1.0 + gamma) + gamma * phi_2r * b * (1.0 + 2.0 * gamma));
    q.ln_1p()
}

pub fn tau_bound_pointwise(params: &ModelParams, phi: &LeaderInfluencePhi, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::Domain(format!("radius must be non-negative, got {radius}")));
    }
    Ok(pointwise_bound_formula(params.gamma, phi.eval(2.0 * radius)?, params.r_gamma(radius)))
}

pub fn tau_bound_distributed(params: &ModelParams, phi: &LeaderInfluencePhi, radius: f64, kernel: &Kernel) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::Domain(format!("radius must be non-negative, got {radius}")));
    }
    Ok(distributed_bound_formula(
        params.gamma,
        phi.eval(2.0 * radius)?,
        params.r_gamma(radius),
        kernel.b_total(),
    ))
}

/// Whether `φ(δ/2) > 1/(2γ)`, with the margin `φ(δ/2) - 1/(2γ)`.
pub fn check_halanay(params: &ModelParams, phi: &LeaderInfluencePhi) -> (bool, f64) {
    let margin = phi.value(params.a_inner / 2.0) - 1.0 / (2.0 * params.gamma);
    (margin > 0.0, margin)
}

/// Interval of admissible Lyapunov weights; `None` when it is empty.
///
/// `kernel_mass` is `None` for the pointwise functional and `Some(B)` for the
/// distributed one.
pub fn lyapunov_weight_interval(
    params: &ModelParams,
    phi: &LeaderInfluencePhi,
    radius: f64,
    tau_max: f64,
    kernel_mass: Option<f64>,
) -> Option<(f64, f64)> {
    let b = kernel_mass.unwrap_or(1.0);
    let g = params.gamma;
    let decay = (-tau_max).exp();
    let lost = -(-tau_max).exp_m1();
    let den = decay - b * (1.0 + 2.0 * g) * lost;
    if !(den > 0.0) {
        return None;
    }
    let lo = params.r_gamma(radius) / den;
    let hi = g * phi.value(2.0 * radius) / (4.0 * b * (1.0 + g) * lost);
    (lo < hi).then_some((lo, hi))
}

/// Midpoint of [`lyapunov_weight_interval`].
pub fn default_lyapunov_weight(
    params: &ModelParams,
    phi: &LeaderInfluencePhi,
    radius: f64,
    tau_max: f64,
    kernel_mass: Option<f64>,
) -> Option<f64> {
    lyapunov_weight_interval(params, phi, radius, tau_max, kernel_mass).map(|(lo, hi)| 0.5 * (lo + hi))
}

/// Least-squares decay rate of `values` on `times ∈ [from, to]`: minus the slope of `ln(values)`.
pub fn fit_decay_rate(times: &[f64], values: &[f64], from: f64, to: f64) -> Result<f64> {
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < from || t > to {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveSeries { t, value: v });
        }
        pts.push((t, v.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::invalid("window", "needs at least two samples"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(-sxy / sxx)
}

/// All delay and settling certificates for a model and its initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub radius_r: f64,
    pub radius_r_star: f64,
    pub r_gamma: f64,
    pub tau_max: f64,
    pub tau_bound_pointwise: f64,
    /// Same bound evaluated with the enclosing-ball radius.
    pub tau_bound_pointwise_star: f64,
    /// Present when the model carries a kernel.
    pub tau_bound_distributed: Option<f64>,
    pub tau_bound_distributed_star: Option<f64>,
    /// Bound for the model's own delay type minus `τ̄`; positive when it complies.
    pub delay_margin: f64,
    pub complies: bool,
    pub halanay_ok: bool,
    pub halanay_margin: f64,
}

impl Certificates {
    pub fn evaluate(model: &Model, history: &InitialHistory) -> Result<Self> {
        let tau_max = model.delay.tau_max();
        let r = radius_r(history, model.tau_max());
        let r_star = radius_r_star(history, model.delay.tau(0.0));
        let (p, phi) = (&model.params, &model.phi);
        let pointwise = tau_bound_pointwise(p, phi, r)?;
        let pointwise_star = tau_bound_pointwise(p, phi, r_star)?;
        let (distributed, distributed_star) = match model.kernel() {
            Some(k) => (
                Some(tau_bound_distributed(p, phi, r, k)?),
                Some(tau_bound_distributed(p, phi, r_star, k)?),
            ),
            None => (None, None),
        };
        let own = distributed.unwrap_or(pointwise);
        let (halanay_ok, halanay_margin) = check_halanay(p, phi);
        Ok(Certificates {
            radius_r: r,
            radius_r_star: r_star,
            r_gamma: p.r_gamma(r),
            tau_max,
            tau_bound_pointwise: pointwise,
            tau_bound_pointwise_star: pointwise_star,
            tau_bound_distributed: distributed,
            tau_bound_distributed_star: distributed_star,
            delay_margin: own - tau_max,
            complies: tau_max < own,
            halanay_ok,
            halanay_margin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::InfluenceA;

    fn params(gamma: f64, l: f64) -> ModelParams {
        ModelParams {
            n_agents: 2,
            dim: 1,
            gamma,
            control_bound: 1.0,
            a_inner: 1.0,
            a_outer: 2.0,
            lipschitz_phi: l,
        }
    }

    #[test]
    fn d0_examples() {
        let x = State::from_agents(&[vec![0.0], vec![0.5], vec![-0.3]]).unwrap();
        assert_eq!(d0_state(&x), (0.5, 1));
        let x = State::from_agents(&[vec![0.0], vec![-0.5], vec![0.5]]).unwrap();
        assert_eq!(d0_state(&x), (0.5, 1));
        let x = State::from_agents(&vec![vec![1.0]; 3]).unwrap();
        assert_eq!(d0_state(&x).0, 0.0);
    }

    #[test]
    fn radii_of_interval_data() {
        let x = State::from_agents(&[vec![0.0], vec![-1.0], vec![1.0], vec![0.2]]).unwrap();
        let h = InitialHistory::constant(x.clone());
        assert_eq!(radius_r(&h, 1.0), 1.0);
        assert!((radius_r_star(&h, 1.0) - 1.0).abs() < 1e-15);
        let shifted = h.translated(&[10.0]);
        assert_eq!(radius_r(&shifted, 1.0), 11.0);
        assert!((radius_r_star(&shifted, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(radius_r(&InitialHistory::constant(State::zeros(3, 2)), 1.0), 0.0);
    }

    #[test]
    fn r_star_uses_history_window() {
        let a = State::from_agents(&[vec![0.0], vec![-3.0]]).unwrap();
        let b = State::from_agents(&[vec![0.0], vec![1.0]]).unwrap();
        let h = InitialHistory::sampled(vec![-2.0, 0.0], vec![a, b]).unwrap();
        // on [-1, 0] the follower sweeps [-1, 1]
        assert!((radius_r_star(&h, 1.0) - 1.0).abs() < 1e-12);
        assert!((radius_r_star(&h, 2.0) - 2.0).abs() < 1e-12);
        assert_eq!(radius_r(&h, 2.0), 3.0);
    }

    #[test]
    fn bound_limits_and_monotonicity() {
        let phi = LeaderInfluencePhi::cucker_smale();
        let l = phi.lipschitz();
        let b = tau_bound_pointwise(&params(1.0, l), &phi, 1.0).unwrap();
        assert!((b - 0.003_858_246_232_697_072).abs() < 1e-6 * b);
        assert!(tau_bound_pointwise(&params(1e-12, l), &phi, 1.0).unwrap() < 1e-12);
        assert!(tau_bound_pointwise(&params(1.0, l), &phi, 2.0).unwrap() < b);
        let k = Kernel::uniform(1.0).unwrap();
        let bd = tau_bound_distributed(&params(1.0, l), &phi, 1.0, &k).unwrap();
        assert!((bd - b).abs() < 1e-15);
        let small = tau_bound_distributed(&params(1.0, l), &phi, 1.0, &k.scaled(1e-3).unwrap()).unwrap();
        let tiny = tau_bound_distributed(&params(1.0, l), &phi, 1.0, &k.scaled(1e-6).unwrap()).unwrap();
        assert!(bd < small && small < tiny);
    }

    #[test]
    fn halanay_examples() {
        let phi = LeaderInfluencePhi::cucker_smale();
        let (ok, m) = check_halanay(&params(1.0, 1.0), &phi);
        assert!(ok && (m - 0.215_541_752_799_932_7).abs() < 1e-15);
        assert!(!check_halanay(&params(0.1, 1.0), &phi).0);
        assert!(check_halanay(&params(0.51, 1.0), &LeaderInfluencePhi::constant()).0);
    }

    #[test]
    fn weight_interval_exists_below_the_bound() {
        let phi = LeaderInfluencePhi::cucker_smale();
        let p = params(1.0, phi.lipschitz());
        let bound = tau_bound_pointwise(&p, &phi, 1.0).unwrap();
        assert!(lyapunov_weight_interval(&p, &phi, 1.0, 0.99 * bound, None).is_some());
        assert!(lyapunov_weight_interval(&p, &phi, 1.0, 1.01 * bound, None).is_none());
        let bd = tau_bound_distributed(&p, &phi, 1.0, &Kernel::uniform(0.5).unwrap()).unwrap();
        assert!(lyapunov_weight_interval(&p, &phi, 1.0, 0.99 * bd, Some(0.5)).is_some());
        assert!(lyapunov_weight_interval(&p, &phi, 1.0, 1.01 * bd, Some(0.5)).is_none());
    }

    #[test]
    fn decay_fits() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.3 * t).exp()).collect();
        assert!((fit_decay_rate(&t, &v, 0.0, 20.0).unwrap() - 0.3).abs() < 1e-9);
        assert!(fit_decay_rate(&t, &vec![2.0; 200], 0.0, 20.0).unwrap().abs() < 1e-15);
        let mut bad = v.clone();
        bad[50] = 0.0;
        assert!(matches!(fit_decay_rate(&t, &bad, 0.0, 20.0), Err(Error::NonPositiveSeries { .. })));
    }

    #[test]
    fn certificates_for_simple_model() {
        let phi = LeaderInfluencePhi::cucker_smale();
        let m = Model::pointwise(
            params(1.0, phi.lipschitz()),
            InfluenceA::linear(1.0, 2.0).unwrap(),
            phi,
            crate::domain::DelayLaw::constant(0.003).unwrap(),
        )
        .unwrap();
        let x = State::from_agents(&[vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        let c = Certificates::evaluate(&m, &InitialHistory::constant(x)).unwrap();
        assert_eq!(c.radius_r, 1.0);
        assert!(c.radius_r_star <= c.radius_r);
        assert!(c.tau_bound_pointwise_star >= c.tau_bound_pointwise);
        assert!(c.complies && c.halanay_ok && c.tau_bound_distributed.is_none());
    }
}
