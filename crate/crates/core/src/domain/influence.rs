//! Follower-follower cut-off weight `a(·)` and leader influence `φ(·)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const SAMPLES: usize = 10_000;

/// Shape of the cut-off between the plateau `[0, a_inner]` and `a_outer`.
#[derive(Clone)]
pub enum CutoffProfile {
    /// `(r - s) / (r - δ)` on the transition band.
    LinearRamp,
    /// Cubic smoothstep `1 - 3x² + 2x³`, `x = (s - δ)/(r - δ)`.
    SmoothStep,
    /// Caller-supplied transition, only consulted on `(δ, r)`.
    Custom(ScalarFn),
}

impl fmt::Debug for CutoffProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffProfile::LinearRamp => write!(f, "LinearRamp"),
            CutoffProfile::SmoothStep => write!(f, "SmoothStep"),
            CutoffProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Continuous non-increasing cut-off: 1 on `[0, δ]`, 0 on `[r, ∞)`.
#[derive(Clone, Debug)]
pub struct InfluenceA {
    a_inner: f64,
    a_outer: f64,
    profile: CutoffProfile,
}

impl InfluenceA {
    pub fn new(a_inner: f64, a_outer: f64, profile: CutoffProfile) -> Result<Self> {
        if !(a_inner > 0.0 && a_inner.is_finite()) {
            return Err(Error::invalid("a_inner", "must be positive and finite"));
        }
        if !(a_outer > a_inner && a_outer.is_finite()) {
            return Err(Error::invalid("a_outer", "must exceed a_inner"));
        }
        let f = InfluenceA {
            a_inner,
            a_outer,
            profile,
        };
        f.verify_sampled()?;
        Ok(f)
    }

    pub fn linear(a_inner: f64, a_outer: f64) -> Result<Self> {
        Self::new(a_inner, a_outer, CutoffProfile::LinearRamp)
    }

    pub fn a_inner(&self) -> f64 {
        self.a_inner
    }

    pub fn a_outer(&self) -> f64 {
        self.a_outer
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("cut-off evaluated at negative distance {s}")));
        }
        Ok(self.weight(s))
    }

    /// Unchecked evaluation for distances, which are non-negative by construction.
    #[inline]
    pub(crate) fn weight(&self, s: f64) -> f64 {
        if s <= self.a_inner {
            return 1.0;
        }
        if s >= self.a_outer {
            return 0.0;
        }
        let x = (s - self.a_inner) / (self.a_outer - self.a_inner);
        match &self.profile {
            CutoffProfile::LinearRamp => (self.a_outer - s) / (self.a_outer - self.a_inner),
            CutoffProfile::SmoothStep => 1.0 - x * x * (3.0 - 2.0 * x),
            CutoffProfile::Custom(f) => f(s),
        }
    }

    fn verify_sampled(&self) -> Result<()> {
        let hi = 1.5 * self.a_outer;
        let h = hi / SAMPLES as f64;
        let mut prev = self.weight(0.0);
        for k in 1..=SAMPLES {
            let s = k as f64 * h;
            let w = self.weight(s);
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid("influence_a", format!("a({s}) = {w} outside [0, 1]")));
            }
            if w > prev + 1e-12 {
                return Err(Error::invalid("influence_a", format!("not non-increasing near s = {s}")));
            }
            if (prev - w).abs() > 0.05 {
                return Err(Error::invalid("influence_a", format!("jump of {} near s = {s}", prev - w)));
            }
            prev = w;
        }
        // continuity at the band edges for custom profiles
        let eps = 1e-9 * self.a_outer;
        if (self.weight(self.a_inner + eps) - 1.0).abs() > 1e-3
            || self.weight(self.a_outer - eps).abs() > 1e-3
        {
            return Err(Error::invalid("influence_a", "profile is discontinuous at the band edges"));
        }
        Ok(())
    }
}

#[derive(Clone)]
pub enum PhiProfile {
    /// `(1 + s²)^(-exponent)`.
    CuckerSmale { exponent: f64 },
    /// `exp(-rate s)`.
    Exponential { rate: f64 },
    /// `φ ≡ 1`.
    Constant,
    Custom(ScalarFn),
}

impl fmt::Debug for PhiProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiProfile::CuckerSmale { exponent } => write!(f, "CuckerSmale({exponent})"),
            PhiProfile::Exponential { rate } => write!(f, "Exponential({rate})"),
            PhiProfile::Constant => write!(f, "Constant"),
            PhiProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PhiProfile {
    /// Smallest valid Lipschitz constant where it has a closed form.
    pub fn exact_lipschitz(&self) -> Option<f64> {
        match *self {
            PhiProfile::CuckerSmale { exponent: p } => {
                // max of 2p s (1+s²)^(-p-1), attained at s = 1/sqrt(2p+1)
                let s = 1.0 / (2.0 * p + 1.0).sqrt();
                Some(2.0 * p * s * (1.0 + s * s).powf(-p - 1.0))
            }
            PhiProfile::Exponential { rate } => Some(rate),
            PhiProfile::Constant => Some(0.0),
            PhiProfile::Custom(_) => None,
        }
    }
}

/// Leader influence: positive, non-increasing, `φ(0) = 1`, Lipschitz with constant `L`.
#[derive(Clone, Debug)]
pub struct LeaderInfluencePhi {
    profile: PhiProfile,
    lipschitz: f64,
}

impl LeaderInfluencePhi {
    /// Validates the profile and the declared Lipschitz constant by sampling.
    pub fn new(profile: PhiProfile, lipschitz: f64) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid("lipschitz_phi", "must be positive and finite"));
        }
        match profile {
            PhiProfile::CuckerSmale { exponent } if !(exponent > 0.0) => {
                return Err(Error::invalid("phi", "Cucker-Smale exponent must be positive"))
            }
            PhiProfile::Exponential { rate } if !(rate > 0.0) => {
                return Err(Error::invalid("phi", "exponential rate must be positive"))
            }
            _ => {}
        }
        let phi = LeaderInfluencePhi { profile, lipschitz };
        phi.verify_sampled()?;
        Ok(phi)
    }

    /// The classical `(1 + s²)^(-3/2)` weight with its exact Lipschitz constant.
    pub fn cucker_smale() -> Self {
        Self::cucker_smale_with_exponent(1.5).expect("exponent 3/2 is valid")
    }

    pub fn cucker_smale_with_exponent(exponent: f64) -> Result<Self> {
        let profile = PhiProfile::CuckerSmale { exponent };
        let l = profile.exact_lipschitz().unwrap_or(f64::NAN);
        // tiny headroom so the sampled check never trips on the last ulp
        Self::new(profile, l * (1.0 + 1e-12))
    }

    /// `φ ≡ 1`; any positive constant bounds its slope, 1 is used.
    pub fn constant() -> Self {
        Self::new(PhiProfile::Constant, 1.0).expect("constant profile is valid")
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn profile(&self) -> &PhiProfile {
        &self.profile
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("phi evaluated at negative distance {s}")));
        }
        Ok(self.value(s))
    }

    #[inline]
    pub(crate) fn value(&self, s: f64) -> f64 {
        match &self.profile {
            PhiProfile::CuckerSmale { exponent } => {
                let b = 1.0 + s * s;
                if *exponent == 1.5 {
                    1.0 / (b * b.sqrt())
                } else {
                    b.powf(-exponent)
                }
            }
            PhiProfile::Exponential { rate } => (-rate * s).exp(),
            PhiProfile::Constant => 1.0,
            PhiProfile::Custom(f) => f(s),
        }
    }

    fn verify_sampled(&self) -> Result<()> {
        if (self.value(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("phi", "phi(0) must equal 1"));
        }
        // dense near the origin where slopes are largest, coarser further out
        let mut prev_s = 0.0;
        let mut prev = self.value(0.0);
        for k in 1..=SAMPLES {
            let s = if k <= SAMPLES / 2 {
                10.0 * k as f64 / (SAMPLES / 2) as f64
            } else {
                10.0 + 990.0 * (k - SAMPLES / 2) as f64 / (SAMPLES / 2) as f64
            };
            let v = self.value(s);
            // far out, fast-decaying profiles may underflow to zero
            if !(v > 0.0 || (v == 0.0 && s > 10.0)) {
                return Err(Error::invalid("phi", format!("phi({s}) = {v} is not positive")));
            }
            if v > prev + 1e-15 {
                return Err(Error::invalid("phi", format!("phi increases near s = {s}")));
            }
            let ratio = (prev - v).abs() / (s - prev_s);
            if ratio > self.lipschitz + 1e-9 {
                return Err(Error::invalid(
                    "lipschitz_phi",
                    format!("sampled slope {ratio} near s = {s} exceeds declared L = {}", self.lipschitz),
                ));
            }
            prev = v;
            prev_s = s;
        }
        Ok(())
    }
}
