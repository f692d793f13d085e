#![allow(dead_code)]

use hkdelay::domain::{
    DelayLaw, InfluenceA, InitialHistory, Kernel, KernelProfile, LeaderInfluencePhi, ModelParams, State,
};
use hkdelay::engine::{IntegratorConfig, Model, Trajectory};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn params(n: usize, d: usize, gamma: f64, m: f64) -> ModelParams {
    let phi = LeaderInfluencePhi::cucker_smale();
    ModelParams {
        n_agents: n,
        dim: d,
        gamma,
        control_bound: m,
        a_inner: 1.0,
        a_outer: 2.0,
        lipschitz_phi: phi.lipschitz(),
    }
}

pub fn pointwise(n: usize, d: usize, gamma: f64, m: f64, delay: DelayLaw) -> Model {
    Model::pointwise(
        params(n, d, gamma, m),
        InfluenceA::linear(1.0, 2.0).unwrap(),
        LeaderInfluencePhi::cucker_smale(),
        delay,
    )
    .unwrap()
}

pub fn distributed(n: usize, d: usize, gamma: f64, m: f64, delay: DelayLaw, kernel: Kernel) -> Model {
    Model::distributed(
        params(n, d, gamma, m),
        InfluenceA::linear(1.0, 2.0).unwrap(),
        LeaderInfluencePhi::cucker_smale(),
        delay,
        kernel,
    )
    .unwrap()
}

pub fn hat(center: f64, width: f64, tau_max: f64) -> Kernel {
    Kernel::new(KernelProfile::Hat { center, width }, tau_max).unwrap()
}

pub fn cfg(step: f64) -> IntegratorConfig {
    IntegratorConfig {
        step,
        ..IntegratorConfig::default()
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-spread..=spread)).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, n_total: usize, d: usize, spread: f64) -> State {
    let agents: Vec<Vec<f64>> = (0..n_total).map(|_| random_point(rng, d, spread)).collect();
    State::from_agents(&agents).unwrap()
}

/// Either a constant history or a piecewise-linear one with a few random samples on `[-tau_max, 0]`.
pub fn random_history(rng: &mut ChaCha8Rng, n_total: usize, d: usize, spread: f64, tau_max: f64) -> InitialHistory {
    if rng.random_bool(0.5) {
        return InitialHistory::constant(random_state(rng, n_total, d, spread));
    }
    let k = rng.random_range(2..=4);
    let times: Vec<f64> = (0..k).map(|j| -tau_max * (1.0 - j as f64 / (k - 1) as f64)).collect();
    let states = (0..k).map(|_| random_state(rng, n_total, d, spread)).collect();
    InitialHistory::sampled(times, states).unwrap()
}

/// Largest agent norm over the forward part of a run.
pub fn max_norm_forward(traj: &Trajectory) -> f64 {
    (traj.origin()..traj.len()).map(|k| traj.state(k).max_norm()).fold(0.0, f64::max)
}

/// Sup-norm distance between two runs sampled on the same grid.
pub fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    assert_eq!(a.forward_times().len(), b.forward_times().len());
    (0..a.forward_times().len())
        .map(|k| {
            let (x, y) = (a.state(a.origin() + k), b.state(b.origin() + k));
            x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
