use crate::domain::{InitialHistory, State};
use crate::error::{Error, Result};

use super::InterpOrder;

/// Dense record of all opinions, derivatives and leader controls on `[-τ̄, t_end]`.
///
/// Times up to index `origin` (where `t = 0`) sample the initial history, which
/// remains the source of truth for lookups at `s ≤ 0`. Forward segments are
/// interpolated from stored states and derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    n_total: usize,
    dim: usize,
    tau_max: f64,
    interp: InterpOrder,
    history: InitialHistory,
    times: Vec<f64>,
    origin: usize,
    states: Vec<f64>,
    derivs: Vec<f64>,
    controls: Vec<f64>,
}

const TIME_TOL: f64 = 1e-12;

impl Trajectory {
    /// A trajectory holding only the initial history, sampled with spacing `≤ step`.
    pub fn from_history(history: InitialHistory, tau_max: f64, step: f64, interp: InterpOrder) -> Result<Self> {
        if !(tau_max > 0.0) {
            return Err(Error::invalid("tau_max", "must be positive"));
        }
        if !(step > 0.0) {
            return Err(Error::invalid("step", "must be positive"));
        }
        if !history.covers(tau_max) {
            return Err(Error::HistoryUnderflow {
                s: -tau_max,
                earliest: history.start(),
            });
        }
        let (n_total, dim) = (history.n_total(), history.dim());
        let n_hist = ((tau_max / step) - 1e-9).ceil().max(1.0) as usize;
        let mut traj = Trajectory {
            n_total,
            dim,
            tau_max,
            interp,
            history,
            times: Vec::with_capacity(n_hist + 1),
            origin: n_hist,
            states: Vec::new(),
            derivs: Vec::new(),
            controls: Vec::new(),
        };
        let width = n_total * dim;
        let mut buf = vec![0.0; width];
        for k in 0..=n_hist {
            let t = if k == n_hist {
                0.0
            } else {
                -tau_max + k as f64 * (tau_max / n_hist as f64)
            };
            traj.times.push(t);
            traj.history.eval_into(t, &mut buf);
            traj.states.extend_from_slice(&buf);
            traj.history.deriv_into(t, &mut buf);
            if k < n_hist {
                traj.derivs.extend_from_slice(&buf);
                traj.controls.extend_from_slice(&buf[..dim]);
            }
        }
        Ok(traj)
    }

    /// Builds a trajectory from externally computed samples on `[0, T]`, with
    /// the history given separately. Intended for synthetic data and tests.
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        history: InitialHistory,
        tau_max: f64,
        hist_step: f64,
        interp: InterpOrder,
        times: &[f64],
        states: &[State],
        derivs: &[State],
        controls: &[Vec<f64>],
    ) -> Result<Self> {
        let mut traj = Self::from_history(history, tau_max, hist_step, interp)?;
        let n = times.len();
        if n == 0 || states.len() != n || derivs.len() != n || controls.len() != n {
            return Err(Error::invalid("samples", "times, states, derivs and controls must have equal non-zero length"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("samples", "times must start at 0 and increase strictly"));
        }
        // the sample at t = 0 replaces the one taken from the history
        traj.states.truncate(traj.origin * traj.width());
        traj.times.truncate(traj.origin);
        for k in 0..n {
            traj.push_state(times[k], &states[k]);
            traj.push_deriv(derivs[k].as_slice(), &controls[k]);
        }
        Ok(traj)
    }

    #[inline]
    fn width(&self) -> usize {
        self.n_total * self.dim
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_followers(&self) -> usize {
        self.n_total - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn interp(&self) -> InterpOrder {
        self.interp
    }

    pub fn history(&self) -> &InitialHistory {
        &self.history
    }

    /// Full grid, history included.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Index of the grid point `t = 0`.
    pub fn origin(&self) -> usize {
        self.origin
    }

    /// Grid points at `t ≥ 0`.
    pub fn forward_times(&self) -> &[f64] {
        &self.times[self.origin..]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn state(&self, k: usize) -> State {
        State::from_flat(self.dim, self.state_slice(k).to_vec())
    }

    #[inline]
    pub(crate) fn state_slice(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.states[k * w..(k + 1) * w]
    }

    /// Stored right-hand side at grid point `k`, if already computed.
    pub fn deriv(&self, k: usize) -> Option<State> {
        self.deriv_slice(k).map(|d| State::from_flat(self.dim, d.to_vec()))
    }

    #[inline]
    pub(crate) fn deriv_slice(&self, k: usize) -> Option<&[f64]> {
        let w = self.width();
        self.derivs.get(k * w..(k + 1) * w)
    }

    /// Leader control at grid point `k` (the leader's slope on the history part).
    pub fn control(&self, k: usize) -> Option<&[f64]> {
        self.controls.get(k * self.dim..(k + 1) * self.dim)
    }

    pub fn final_state(&self) -> State {
        self.state(self.len() - 1)
    }

    pub(crate) fn push_state(&mut self, t: f64, state: &State) {
        debug_assert_eq!(state.as_slice().len(), self.width());
        self.times.push(t);
        self.states.extend_from_slice(state.as_slice());
    }

    pub(crate) fn push_deriv(&mut self, deriv: &[f64], control: &[f64]) {
        debug_assert_eq!(self.derivs.len() / self.width() + 1, self.times.len());
        self.derivs.extend_from_slice(deriv);
        self.controls.extend_from_slice(control);
    }

    /// Interpolated state at `s ∈ [-τ̄, t_last]`; exact at grid points.
    pub fn lookup(&self, s: f64) -> Result<State> {
        let mut out = State::zeros(self.n_total, self.dim);
        self.sample_into(s, out.as_mut_slice(), false)?;
        Ok(out)
    }

    /// Writes the state at `s` into `out`. With `extrapolate`, times past the
    /// last grid point continue the last interpolating polynomial.
    pub(crate) fn sample_into(&self, s: f64, out: &mut [f64], extrapolate: bool) -> Result<()> {
        let lo = -self.tau_max;
        if s < lo - TIME_TOL * self.tau_max.max(1.0) {
            return Err(Error::HistoryUnderflow { s, earliest: lo });
        }
        if s <= 0.0 {
            self.history.eval_into(s.max(lo), out);
            return Ok(());
        }
        let n = self.times.len() - 1;
        let t_last = self.times[n];
        if s > t_last {
            if !extrapolate && s > t_last + TIME_TOL * t_last.abs().max(1.0) {
                return Err(Error::OutOfRange { s, lo, hi: t_last });
            }
            if !extrapolate {
                out.copy_from_slice(self.state_slice(n));
                return Ok(());
            }
            return self.extrapolate_into(s, out);
        }
        let k = (self.times.partition_point(|&t| t <= s).max(1) - 1).max(self.origin).min(n - 1);
        self.segment_into(k, s, out);
        Ok(())
    }

    fn segment_into(&self, k: usize, s: f64, out: &mut [f64]) {
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let th = (s - t0) / h;
        let x0 = self.state_slice(k);
        let x1 = self.state_slice(k + 1);
        if th == 0.0 {
            out.copy_from_slice(x0);
            return;
        }
        if th == 1.0 {
            out.copy_from_slice(x1);
            return;
        }
        match (self.interp, self.deriv_slice(k), self.deriv_slice(k + 1)) {
            (InterpOrder::CubicHermite, Some(f0), Some(f1)) => hermite(x0, f0, x1, f1, h, th, out),
            (InterpOrder::CubicHermite, Some(f0), None) => {
                // end slope not known yet: quadratic through x0, x0' and x1
                for i in 0..out.len() {
                    let lin = h * f0[i];
                    out[i] = x0[i] + th * lin + th * th * (x1[i] - x0[i] - lin);
                }
            }
            _ => {
                for i in 0..out.len() {
                    out[i] = x0[i] + th * (x1[i] - x0[i]);
                }
            }
        }
    }

    fn extrapolate_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        let n = self.times.len() - 1;
        let xn = self.state_slice(n);
        let Some(fn_) = self.deriv_slice(n) else {
            out.copy_from_slice(xn);
            return Ok(());
        };
        if n > self.origin && self.interp == InterpOrder::CubicHermite {
            let (t0, t1) = (self.times[n - 1], self.times[n]);
            let f0 = self.deriv_slice(n - 1).expect("earlier derivatives are stored");
            hermite(self.state_slice(n - 1), f0, xn, fn_, t1 - t0, (s - t0) / (t1 - t0), out);
        } else {
            let dt = s - self.times[n];
            for i in 0..out.len() {
                out[i] = xn[i] + dt * fn_[i];
            }
        }
        Ok(())
    }

    /// Indices of grid points with `t ∈ [a, b]`.
    pub fn indices_between(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&t| t < a - TIME_TOL);
        let hi = self.times.partition_point(|&t| t <= b + TIME_TOL);
        lo..hi.max(lo)
    }
}

#[inline]
fn hermite(x0: &[f64], f0: &[f64], x1: &[f64], f1: &[f64], h: f64, th: f64, out: &mut [f64]) {
    let th2 = th * th;
    let th3 = th2 * th;
    let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    let h10 = th3 - 2.0 * th2 + th;
    let h01 = -2.0 * th3 + 3.0 * th2;
    let h11 = th3 - th2;
    for i in 0..out.len() {
        out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
    }
}
