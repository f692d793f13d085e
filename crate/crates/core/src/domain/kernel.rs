use serde::{Deserialize, Serialize};

use super::delay::DelayLaw;
use crate::error::{Error, Result};

/// Shape of the distributed-delay weight `β` on `[0, τ̄]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelProfile {
    /// `β ≡ value`.
    Uniform { value: f64 },
    /// Triangle of unit mass supported on `[center - width/2, center + width/2]`.
    Hat { center: f64, width: f64 },
    /// Piecewise-linear through `points`, zero outside their span.
    Table { points: Vec<(f64, f64)> },
}

impl KernelProfile {
    fn value(&self, s: f64) -> f64 {
        match self {
            KernelProfile::Uniform { value } => *value,
            KernelProfile::Hat { center, width } => {
                let half = 0.5 * width;
                let x = (s - center).abs();
                if x >= half {
                    0.0
                } else {
                    (half - x) / (half * half)
                }
            }
            KernelProfile::Table { points } => {
                let first = points[0].0;
                let last = points[points.len() - 1].0;
                if s < first || s > last {
                    return 0.0;
                }
                let k = points.partition_point(|p| p.0 <= s).saturating_sub(1).min(points.len() - 2);
                let (x0, y0) = points[k];
                let (x1, y1) = points[k + 1];
                y0 + (s - x0) / (x1 - x0) * (y1 - y0)
            }
        }
    }

    /// Points where the profile may have a kink.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            KernelProfile::Uniform { .. } => vec![],
            KernelProfile::Hat { center, width } => vec![center - 0.5 * width, *center, center + 0.5 * width],
            KernelProfile::Table { points } => points.iter().map(|p| p.0).collect(),
        }
    }
}

/// Weight `β ≥ 0` on `[0, τ̄]` with its total mass `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    profile: KernelProfile,
    scale: f64,
    tau_max: f64,
    b_total: f64,
}

impl Kernel {
    pub fn new(profile: KernelProfile, tau_max: f64) -> Result<Self> {
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::invalid("kernel.tau_max", "must be positive"));
        }
        match &profile {
            KernelProfile::Uniform { value } if !(*value >= 0.0 && value.is_finite()) => {
                return Err(Error::invalid("kernel.value", "must be non-negative"))
            }
            KernelProfile::Hat { width, center } if !(*width > 0.0 && center.is_finite()) => {
                return Err(Error::invalid("kernel.width", "must be positive"))
            }
            KernelProfile::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::invalid("kernel.points", "need at least two points"));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::invalid("kernel.points", "abscissae must be strictly increasing"));
                }
                if points.iter().any(|p| !(p.1 >= 0.0)) {
                    return Err(Error::invalid("kernel.points", "weights must be non-negative"));
                }
            }
            _ => {}
        }
        let mut k = Kernel {
            profile,
            scale: 1.0,
            tau_max,
            b_total: 0.0,
        };
        k.b_total = k.integral(0.0, tau_max);
        if !(k.b_total > 0.0) {
            return Err(Error::invalid("kernel", "total mass B must be positive"));
        }
        Ok(k)
    }

    pub fn uniform(tau_max: f64) -> Result<Self> {
        Self::new(KernelProfile::Uniform { value: 1.0 }, tau_max)
    }

    /// Same shape with mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("kernel.scale", "must be positive"));
        }
        let mut k = self.clone();
        k.scale *= factor;
        k.b_total = k.integral(0.0, k.tau_max);
        Ok(k)
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn b_total(&self) -> f64 {
        self.b_total
    }

    /// `β(s)`; zero outside `[0, τ̄]`.
    #[inline]
    pub fn beta(&self, s: f64) -> f64 {
        if s < 0.0 || s > self.tau_max {
            return 0.0;
        }
        self.scale * self.profile.value(s)
    }

    /// `∫_a^b β`, exact for the piecewise-linear profiles (Simpson per smooth piece).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(self.tau_max);
        if !(b > a) {
            return 0.0;
        }
        let mut cuts: Vec<f64> = std::iter::once(a)
            .chain(self.profile.breakpoints().into_iter().filter(|&x| x > a && x < b))
            .chain(std::iter::once(b))
            .collect();
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let (l, r) = (w[0], w[1]);
                let m = 0.5 * (l + r);
                (r - l) / 6.0 * (self.beta_inside(l) + 4.0 * self.beta(m) + self.beta_inside(r))
            })
            .sum()
    }

    // endpoint values at 0 and tau_max must not be cut by the domain guard
    fn beta_inside(&self, s: f64) -> f64 {
        self.scale * self.profile.value(s.clamp(0.0, self.tau_max))
    }

    /// `∫_0^{τ*} β > 0`, required for `h(t)` to stay positive.
    pub fn check_support(&self, delay: &DelayLaw) -> Result<()> {
        let m = self.integral(0.0, delay.tau_min());
        if !(m > 0.0) {
            return Err(Error::KernelViolation { t: 0.0, h: m });
        }
        Ok(())
    }

    /// `h(t) = ∫_0^{τ(t)} β(s) ds`.
    pub fn eval_h(&self, delay: &DelayLaw, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("h evaluated at negative time {t}")));
        }
        let h = self.integral(0.0, delay.tau(t));
        if !(h > 0.0) {
            return Err(Error::KernelViolation { t, h });
        }
        Ok(h)
    }
}
