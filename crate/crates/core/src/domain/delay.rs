use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayProfile {
    Constant { value: f64 },
    /// `mean + amplitude * sin(omega * t)`.
    Sinusoidal { mean: f64, amplitude: f64, omega: f64 },
    /// Piecewise-linear through `(times[k], values[k])`, held constant outside.
    Table { times: Vec<f64>, values: Vec<f64> },
}

/// Time-varying delay `τ(t)` with bounds `τ* ≤ τ(t) ≤ τ̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayLaw {
    profile: DelayProfile,
    tau_max: f64,
    tau_min: f64,
}

impl DelayLaw {
    /// Bounds are taken from the profile itself.
    pub fn new(profile: DelayProfile) -> Result<Self> {
        let (_, hi) = profile_range(&profile)?;
        if !(hi > 0.0) {
            return Err(Error::invalid("delay", "the maximal delay must be positive"));
        }
        Self::bounded(profile, hi)
    }

    /// Profile with an explicit history length `τ̄ ≥ sup τ`; allows `τ ≡ 0`.
    pub fn bounded(profile: DelayProfile, tau_max: f64) -> Result<Self> {
        let (lo, hi) = profile_range(&profile)?;
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::invalid("tau_max", "must be positive and finite"));
        }
        if hi > tau_max {
            return Err(Error::invalid("tau_max", format!("must be >= sup tau = {hi}")));
        }
        Ok(DelayLaw {
            profile,
            tau_max,
            tau_min: lo,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(DelayProfile::Constant { value })
    }

    /// Declares a history length `τ̄` larger than the supremum of the profile.
    pub fn with_tau_max(mut self, tau_max: f64) -> Result<Self> {
        if !(tau_max >= self.tau_max) {
            return Err(Error::invalid("tau_max", format!("must be >= sup tau = {}", self.tau_max)));
        }
        self.tau_max = tau_max;
        Ok(self)
    }

    pub fn profile(&self) -> &DelayProfile {
        &self.profile
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    #[inline]
    pub fn tau(&self, t: f64) -> f64 {
        let v = match &self.profile {
            DelayProfile::Constant { value } => *value,
            DelayProfile::Sinusoidal { mean, amplitude, omega } => mean + amplitude * (omega * t).sin(),
            DelayProfile::Table { times, values } => interp_clamped(times, values, t),
        };
        v.clamp(self.tau_min, self.tau_max)
    }

    /// Checks the bounds and continuity on `n` samples of `[0, horizon]`.
    pub fn verify_sampled(&self, horizon: f64, n: usize) -> Result<()> {
        let h = horizon / n.max(1) as f64;
        let mut prev = self.tau(0.0);
        for k in 0..=n {
            let t = k as f64 * h;
            let v = self.tau(t);
            if v < self.tau_min - 1e-12 || v > self.tau_max + 1e-12 {
                return Err(Error::invalid("delay", format!("tau({t}) = {v} leaves [{}, {}]", self.tau_min, self.tau_max)));
            }
            if (v - prev).abs() > 0.1 * self.tau_max.max(1e-12) && h < 1e-2 {
                return Err(Error::invalid("delay", format!("tau jumps near t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }
}

fn profile_range(profile: &DelayProfile) -> Result<(f64, f64)> {
    let (lo, hi) = match profile {
        DelayProfile::Constant { value } => (*value, *value),
        DelayProfile::Sinusoidal { mean, amplitude, omega } => {
            if !omega.is_finite() {
                return Err(Error::invalid("delay.omega", "must be finite"));
            }
            (mean - amplitude.abs(), mean + amplitude.abs())
        }
        DelayProfile::Table { times, values } => {
            if times.is_empty() || times.len() != values.len() {
                return Err(Error::invalid("delay.table", "times and values must be non-empty and equally long"));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("delay.table", "times must be strictly increasing"));
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(lo >= 0.0) || !hi.is_finite() {
        return Err(Error::invalid("delay", format!("delay must stay in [0, ∞), got range [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_follow_profile() {
        let d = DelayLaw::new(DelayProfile::Sinusoidal { mean: 0.5, amplitude: 0.25, omega: 1.0 }).unwrap();
        assert_eq!(d.tau_min(), 0.25);
        assert_eq!(d.tau_max(), 0.75);
        assert_eq!(d.tau(0.0), 0.5);
        d.verify_sampled(100.0, 100_000).unwrap();
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let d = DelayLaw::new(DelayProfile::Table { times: vec![0.0, 1.0], values: vec![1.0, 2.0] }).unwrap();
        assert_eq!(d.tau(0.5), 1.5);
        assert_eq!(d.tau(5.0), 2.0);
    }

    #[test]
    fn negative_delay_rejected() {
        assert!(DelayLaw::new(DelayProfile::Sinusoidal { mean: 0.1, amplitude: 0.5, omega: 1.0 }).is_err());
        assert!(DelayLaw::constant(0.0).is_err());
        assert!(DelayLaw::constant(1.0).unwrap().with_tau_max(0.5).is_err());
        let zero = DelayLaw::bounded(DelayProfile::Constant { value: 0.0 }, 1.0).unwrap();
        assert_eq!((zero.tau(3.0), zero.tau_max()), (0.0, 1.0));
    }
}
