use super::state::State;
use crate::error::{Error, Result};

/// Initial data on `[-τ̄, 0]` for the leader and all followers.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialHistory {
    /// Each agent frozen at one opinion.
    Constant(State),
    /// Linear interpolation between samples; `times` must reach `0`.
    Sampled { times: Vec<f64>, states: Vec<State> },
}

impl InitialHistory {
    pub fn constant(state: State) -> Self {
        InitialHistory::Constant(state)
    }

    pub fn sampled(times: Vec<f64>, states: Vec<State>) -> Result<Self> {
        if times.len() < 2 || times.len() != states.len() {
            return Err(Error::invalid("history", "need at least two samples with matching states"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("history", "sample times must be strictly increasing"));
        }
        if times[times.len() - 1] != 0.0 {
            return Err(Error::invalid("history", "last sample must be at t = 0"));
        }
        let (n, d) = (states[0].n_total(), states[0].dim());
        if states.iter().any(|s| s.n_total() != n || s.dim() != d) {
            return Err(Error::invalid("history", "samples have inconsistent shapes"));
        }
        Ok(InitialHistory::Sampled { times, states })
    }

    pub fn n_total(&self) -> usize {
        self.first().n_total()
    }

    pub fn dim(&self) -> usize {
        self.first().dim()
    }

    fn first(&self) -> &State {
        match self {
            InitialHistory::Constant(s) => s,
            InitialHistory::Sampled { states, .. } => &states[0],
        }
    }

    /// Earliest time covered.
    pub fn start(&self) -> f64 {
        match self {
            InitialHistory::Constant(_) => f64::NEG_INFINITY,
            InitialHistory::Sampled { times, .. } => times[0],
        }
    }

    pub fn covers(&self, tau_max: f64) -> bool {
        self.start() <= -tau_max
    }

    pub fn at_zero(&self) -> State {
        self.eval(0.0)
    }

    pub fn eval(&self, s: f64) -> State {
        let mut out = State::zeros(self.n_total(), self.dim());
        self.eval_into(s, out.as_mut_slice());
        out
    }

    pub(crate) fn eval_into(&self, s: f64, out: &mut [f64]) {
        match self {
            InitialHistory::Constant(c) => out.copy_from_slice(c.as_slice()),
            InitialHistory::Sampled { times, states } => {
                let (k, w) = segment(times, s);
                let (a, b) = (states[k].as_slice(), states[k + 1].as_slice());
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = x + w * (y - x);
                }
            }
        }
    }

    /// Slope of the history at `s` (right-derivative, left one at `s = 0`).
    pub(crate) fn deriv_into(&self, s: f64, out: &mut [f64]) {
        match self {
            InitialHistory::Constant(_) => out.iter_mut().for_each(|o| *o = 0.0),
            InitialHistory::Sampled { times, states } => {
                let (k, _) = segment(times, s);
                let dt = times[k + 1] - times[k];
                let (a, b) = (states[k].as_slice(), states[k + 1].as_slice());
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = (y - x) / dt;
                }
            }
        }
    }

    /// Sample points inside `[lo, 0]` plus the interpolated endpoint at `lo`.
    pub fn samples_in(&self, lo: f64) -> Vec<State> {
        match self {
            InitialHistory::Constant(c) => vec![c.clone()],
            InitialHistory::Sampled { times, states } => {
                let mut out = vec![self.eval(lo.max(times[0]))];
                out.extend(
                    times
                        .iter()
                        .zip(states)
                        .filter(|(t, _)| **t > lo)
                        .map(|(_, s)| s.clone()),
                );
                out
            }
        }
    }

    /// Same history with every opinion shifted by `c`.
    pub fn translated(&self, c: &[f64]) -> Self {
        match self {
            InitialHistory::Constant(s) => InitialHistory::Constant(s.translated(c)),
            InitialHistory::Sampled { times, states } => InitialHistory::Sampled {
                times: times.clone(),
                states: states.iter().map(|s| s.translated(c)).collect(),
            },
        }
    }
}

fn segment(times: &[f64], s: f64) -> (usize, f64) {
    let last = times.len() - 1;
    let k = times.partition_point(|&t| t <= s).clamp(1, last) - 1;
    let w = ((s - times[k]) / (times[k + 1] - times[k])).clamp(0.0, 1.0);
    (k, w)
}
