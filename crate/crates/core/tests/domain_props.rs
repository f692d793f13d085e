use hkdelay::domain::{CutoffProfile, InfluenceA, LeaderInfluencePhi, PhiProfile};
use proptest::prelude::*;

const SAMPLES: usize = 10_000;

fn cutoff() -> impl Strategy<Value = CutoffProfile> {
    prop_oneof![Just(CutoffProfile::LinearRamp), Just(CutoffProfile::SmoothStep)]
}

proptest! {
    #[test]
    fn cutoff_is_monotone_with_plateau(inner in 0.01f64..5.0, gap in 0.01f64..5.0, profile in cutoff()) {
        let a = InfluenceA::new(inner, inner + gap, profile).unwrap();
        let hi = 1.5 * (inner + gap);
        let mut prev = a.eval(0.0).unwrap();
        prop_assert_eq!(prev, 1.0);
        for k in 1..=SAMPLES {
            let s = hi * k as f64 / SAMPLES as f64;
            let w = a.eval(s).unwrap();
            prop_assert!(w <= prev, "a rises at {}", s);
            if s <= inner {
                prop_assert_eq!(w, 1.0);
            }
            if s >= inner + gap {
                prop_assert_eq!(w, 0.0);
            }
            prev = w;
        }
    }

    #[test]
    fn phi_respects_its_lipschitz_constant(
        profile in prop_oneof![
            (0.1f64..4.0).prop_map(|exponent| PhiProfile::CuckerSmale { exponent }),
            (0.1f64..4.0).prop_map(|rate| PhiProfile::Exponential { rate }),
        ],
        reach in 0.5f64..20.0,
    ) {
        let l = profile.exact_lipschitz().unwrap();
        let phi = LeaderInfluencePhi::new(profile, l * (1.0 + 1e-12)).unwrap();
        let h = reach / SAMPLES as f64;
        let mut prev = phi.eval(0.0).unwrap();
        for k in 1..=SAMPLES {
            let v = phi.eval(k as f64 * h).unwrap();
            prop_assert!((prev - v).abs() / h <= phi.lipschitz() + 1e-9);
            prev = v;
        }
    }

    #[test]
    fn understated_lipschitz_constant_is_rejected(exponent in 0.5f64..3.0) {
        let profile = PhiProfile::CuckerSmale { exponent };
        let l = profile.exact_lipschitz().unwrap();
        prop_assert!(LeaderInfluencePhi::new(profile, 0.9 * l).is_err());
    }
}

#[test]
fn section6_lipschitz_constant() {
    // max of 3s(1+s²)^(-5/2), attained at s = 1/2
    let l = 3.0 * 0.5 * 1.25f64.powf(-2.5);
    let phi = LeaderInfluencePhi::cucker_smale();
    assert!((phi.lipschitz() - l).abs() <= 1e-11 * l);
    assert!((l - 0.85865).abs() < 1e-5);
}
