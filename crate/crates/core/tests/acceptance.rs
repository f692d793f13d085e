//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints one line; exits non-zero if any fails.

mod common;

use std::time::Instant;

use hkdelay::analysis::{
    analyze, check_halanay, d0_series, fit_decay_rate, radius_r, tau_bound_distributed, tau_bound_pointwise,
};
use hkdelay::controllers::{alpha_distributed, alpha_pointwise, u_consensus_distributed, u_consensus_pointwise, u_steer, ControlPolicy};
use hkdelay::domain::{norm, DelayLaw, DelayProfile, InitialHistory, Kernel, LeaderInfluencePhi, State};
use hkdelay::engine::{integrate, simulate, DelayedView, Trajectory};
use hkdelay::scenario::{fig1, fig2, run_scenario, InitialConfig, PolicyConfig, FIG2_TARGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: hkdelay::Error) -> String {
    e.to_string()
}

fn boundedness_pointwise() -> Check {
    let worst = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let n = rng.random_range(1..=20);
            let d = rng.random_range(1..=3);
            let gamma = rng.random_range(0.5..2.0);
            let m = rng.random_range(0.2..2.0);
            let delay = if rng.random_bool(0.5) {
                DelayLaw::constant(rng.random_range(0.05..2.0)).unwrap()
            } else {
                let mean = rng.random_range(0.3..1.5);
                DelayLaw::new(DelayProfile::Sinusoidal {
                    mean,
                    amplitude: 0.2 * mean,
                    omega: rng.random_range(0.5..3.0),
                })
                .unwrap()
            };
            let model = pointwise(n, d, gamma, m, delay);
            let spread = rng.random_range(0.1..3.0);
            let history = random_history(&mut rng, n + 1, d, spread, model.tau_max());
            let r = radius_r(&history, model.tau_max());
            let traj = integrate(&model, &ControlPolicy::ConsensusPointwise, history, 15.0, &cfg(0.02)).map_err(err)?;
            Ok((max_norm_forward(&traj) / r, seed))
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
    ensure(worst.0 <= 1.0 + 1e-6, format!("seed {} reached {:.9} R", worst.1, worst.0))?;
    Ok(format!("50 runs, max |x|/R = {:.9}", worst.0))
}

fn boundedness_distributed() -> Check {
    let worst = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let n = rng.random_range(1..=20);
            let d = rng.random_range(1..=3);
            let gamma = rng.random_range(0.5..2.0);
            let m = rng.random_range(0.2..2.0);
            let tau = rng.random_range(0.2..1.5);
            let kernel = if seed % 2 == 0 {
                Kernel::uniform(tau).unwrap()
            } else {
                let width = rng.random_range(0.1..1.0) * tau;
                hat(rng.random_range(0.5 * width..=tau - 0.5 * width), width, tau)
            };
            let model = distributed(n, d, gamma, m, DelayLaw::constant(tau).unwrap(), kernel);
            let spread = rng.random_range(0.1..3.0);
            let history = random_history(&mut rng, n + 1, d, spread, tau);
            let r = radius_r(&history, model.tau_max());
            let traj = integrate(&model, &ControlPolicy::ConsensusDistributed, history, 10.0, &cfg(0.05)).map_err(err)?;
            Ok((max_norm_forward(&traj) / r, seed))
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
    ensure(worst.0 <= 1.0 + 1e-6, format!("seed {} reached {:.9} R", worst.1, worst.0))?;
    Ok(format!("50 runs (uniform and hat kernels), max |x|/R = {:.9}", worst.0))
}

fn admissibility() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_u, mut worst_alpha) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let d = rng.random_range(1..=3);
        let m = rng.random_range(0.01..3.0);
        let gamma = rng.random_range(0.1..5.0);
        let tau = rng.random_range(0.1..2.0);
        let spread = 10f64.powf(rng.random_range(-3.0..1.0));
        let history = random_history(&mut rng, n + 1, d, spread, tau);
        let current = random_state(&mut rng, n + 1, d, spread);
        let delay = DelayLaw::constant(tau).unwrap();

        let pw = pointwise(n, d, gamma, m, delay.clone());
        let traj = Trajectory::from_history(history.clone(), tau, 0.05, Default::default()).map_err(err)?;
        let view = DelayedView::new(&traj, 0.0, &current);
        let u = u_consensus_pointwise(&view, &pw).map_err(err)?;
        ensure(norm(&u) <= m, format!("pointwise |u| = {} > M = {m}", norm(&u)))?;
        let na = n as f64 * alpha_pointwise(&view, &pw).map_err(err)?;
        ensure(na <= 1.0, format!("N alpha = {na}"))?;
        worst_u = worst_u.max(norm(&u) / m);
        worst_alpha = worst_alpha.max(na);

        let ds = distributed(n, d, gamma, m, delay, Kernel::uniform(tau).unwrap());
        let u = u_consensus_distributed(&view, &ds, &cfg(0.05)).map_err(err)?;
        ensure(norm(&u) <= m, format!("distributed |u| = {} > M = {m}", norm(&u)))?;
        let na = n as f64 * alpha_distributed(&view, -rng.random_range(0.0..tau), &ds).map_err(err)?;
        ensure(na <= 1.0, format!("distributed N alpha = {na}"))?;
        worst_u = worst_u.max(norm(&u) / m);

        let xi = random_point(&mut rng, d, 10.0);
        let u = u_steer(current.leader(), &xi, m);
        ensure(norm(&u) <= m * (1.0 + 1e-15), format!("steering |u| = {} > M = {m}", norm(&u)))?;
    }
    Ok(format!("3 x 1000 draws, max |u|/M = {worst_u:.15}, max N alpha = {worst_alpha:.6}"))
}

fn consensus_preset() -> Check {
    let runs = [0.5, 1.0, 10.0, 25.0]
        .into_par_iter()
        .map(|tau| run_scenario(&fig1(tau)).map(|r| (tau, r.report)).map_err(err))
        .collect::<Result<Vec<_>, String>>()?;
    let mut parts = vec![];
    for (tau, rep) in &runs {
        let t = rep
            .consensus_time
            .ok_or_else(|| format!("tau = {tau}: d0 never dropped below {}", rep.consensus_threshold))?;
        if *tau >= 10.0 {
            ensure(rep.oscillation, format!("tau = {tau}: d0 is monotone"))?;
        }
        parts.push(format!("tau {tau}: t_c {t}{}", if rep.oscillation { " osc" } else { "" }));
    }
    Ok(parts.join(", "))
}

fn waypoint_preset() -> Check {
    let run = run_scenario(&fig2()).map_err(err)?;
    let traj = &run.simulation.trajectory;
    let t_end = traj.t_last();
    let mut worst = 0.0f64;
    for k in traj.indices_between(t_end - 10.0, t_end + 1.0) {
        let x = traj.state(k);
        for i in 0..x.n_total() {
            worst = worst.max((x.agent(i)[0] - FIG2_TARGET).abs());
        }
    }
    ensure(worst <= 0.05, format!("max |x_i - 4| = {worst} over the last 10 time units"))?;
    let c = &run.report.certificates;
    ensure(c.halanay_ok, "settling condition reported false")?;
    ensure(
        (c.halanay_margin - 0.2155).abs() <= 1e-4,
        format!("settling margin {}", c.halanay_margin),
    )?;
    ensure(!run.report.timed_out, "a controller phase timed out")?;
    Ok(format!("max |x_i - 4| on last 10 = {worst:.3e}, margin {:.6}", c.halanay_margin))
}

fn steering() -> Check {
    let xi = 4.0;
    let model = pointwise(3, 1, 1.0, 2.0, DelayLaw::constant(1.0).unwrap());
    let history = InitialHistory::constant(State::from_agents(&[vec![0.0], vec![0.5], vec![-1.0], vec![2.0]]).unwrap());
    let r_tilde = history_spread_about(&history, 1.0, xi);
    let traj = integrate(&model, &ControlPolicy::Steer { target: vec![xi] }, history, 6.0, &cfg(0.01)).map_err(err)?;
    let x0 = traj.lookup(2.0).map_err(err)?.leader()[0];
    ensure((x0 - xi).abs() <= 1e-3, format!("|x0(2) - 4| = {}", (x0 - xi).abs()))?;
    let worst = (traj.origin()..traj.len())
        .map(|k| {
            let x = traj.state(k);
            (0..x.n_total()).map(|i| (x.agent(i)[0] - xi).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    ensure(worst <= r_tilde * (1.0 + 1e-9), format!("max |x_i - xi| = {worst} > {r_tilde}"))?;
    Ok(format!("|x0(2) - 4| = {:.1e}, max |x_i - 4| = {worst:.6} <= {r_tilde}", (x0 - xi).abs()))
}

fn history_spread_about(history: &InitialHistory, tau: f64, xi: f64) -> f64 {
    history
        .samples_in(-tau)
        .iter()
        .flat_map(|s| (0..s.n_total()).map(move |i| (s.agent(i)[0] - xi).abs()))
        .fold(0.0, f64::max)
}

fn halanay_decay() -> Check {
    let half_delta = 0.5;
    let mut rates = vec![];
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let d = 1 + (seed as usize % 2);
        let model = pointwise(10, d, 1.0, 1.0, DelayLaw::constant(1.0).unwrap());
        let (ok, _) = check_halanay(&model.params, &model.phi);
        ensure(ok, "settling condition fails")?;
        let leader = random_point(&mut rng, d, 1.0);
        let mut agents = vec![leader.clone()];
        while agents.len() < 11 {
            let p = random_point(&mut rng, d, half_delta);
            if norm(&p) <= half_delta {
                agents.push(leader.iter().zip(&p).map(|(a, b)| a + b).collect());
            }
        }
        let history = InitialHistory::constant(State::from_agents(&agents).unwrap());
        let t_end = 16.0;
        let traj = integrate(&model, &ControlPolicy::Zero, history, t_end, &cfg(0.01)).map_err(err)?;
        let d0 = d0_series(&traj);
        let peak = d0.iter().copied().fold(0.0, f64::max);
        ensure(peak <= half_delta * (1.0 + 1e-12), format!("left the ball: d0 = {peak}"))?;
        let rate = fit_decay_rate(traj.forward_times(), &d0, 0.5 * t_end, t_end).map_err(err)?;
        ensure(rate >= 0.05, format!("seed {seed}: fitted rate {rate}"))?;
        rates.push(rate);
    }
    let low = rates.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("5 runs, d0 <= delta/2 throughout, min fitted rate {low:.4}"))
}

// 50-digit values from tests/oracles/certificates.py
const ORACLE_POINTWISE: f64 = 0.003_858_246_370_315_816_422_778_162_849_709_1;
const ORACLE_DISTRIBUTED: f64 = 0.003_858_246_370_315_816_422_778_162_849_709_1;

fn certificates() -> Check {
    let mut p = params(50, 1, 1.0, 1.0);
    p.lipschitz_phi = 0.85865;
    let phi = LeaderInfluencePhi::new(LeaderInfluencePhi::cucker_smale().profile().clone(), 0.85865).map_err(err)?;
    let pw = tau_bound_pointwise(&p, &phi, 1.0).map_err(err)?;
    let ds = tau_bound_distributed(&p, &phi, 1.0, &Kernel::uniform(1.0).unwrap()).map_err(err)?;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    ensure(rel(pw, ORACLE_POINTWISE) <= 1e-6, format!("pointwise {pw} vs {ORACLE_POINTWISE}"))?;
    ensure(rel(ds, ORACLE_DISTRIBUTED) <= 1e-6, format!("distributed {ds} vs {ORACLE_DISTRIBUTED}"))?;
    Ok(format!(
        "pointwise {pw:.10e} (rel {:.1e}), distributed {ds:.10e} (rel {:.1e})",
        rel(pw, ORACLE_POINTWISE),
        rel(ds, ORACLE_DISTRIBUTED)
    ))
}

fn lyapunov_monotone() -> Check {
    let tau = 0.003;
    let agents: Vec<Vec<f64>> = std::iter::once(vec![0.0])
        .chain((1..=10).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 } * i as f64 / 10.0]))
        .collect();
    let history = InitialHistory::constant(State::from_agents(&agents).unwrap());
    let cases = [
        ("pointwise", pointwise(10, 1, 1.0, 1.0, DelayLaw::constant(tau).unwrap())),
        (
            "distributed",
            distributed(10, 1, 1.0, 1.0, DelayLaw::constant(tau).unwrap(), Kernel::uniform(tau).unwrap()),
        ),
    ];
    let mut parts = vec![];
    for (name, model) in cases {
        let policy = ControlPolicy::consensus_for(model.kind);
        let sim = simulate(&model, &policy, history.clone(), 6.0, &cfg(0.001)).map_err(err)?;
        let rep = analyze(&model, &history, &sim).map_err(err)?;
        ensure(rep.certificates.complies, format!("{name}: delay above the bound"))?;
        ensure(rep.lyapunov_weight.is_some(), format!("{name}: no feasible weight"))?;
        let series: Vec<f64> = rep.lyapunov_series.iter().flatten().copied().collect();
        ensure(series.len() > 5000, format!("{name}: only {} samples", series.len()))?;
        let rise = series.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        ensure(rise <= 1e-6, format!("{name}: functional rose by {rise}"))?;
        parts.push(format!("{name} max step change {rise:+.2e}"));
    }
    Ok(parts.join(", "))
}

fn dirac_limit() -> Check {
    let tau = 1.0;
    let n = 6;
    let history = InitialHistory::constant(
        State::from_agents(&[vec![0.0], vec![0.9], vec![-0.7], vec![0.4], vec![-0.2], vec![1.3], vec![-1.1]]).unwrap(),
    );
    let step = 0.01;
    let reference = integrate(
        &pointwise(n, 1, 1.0, 1.0, DelayLaw::constant(tau).unwrap()),
        &ControlPolicy::ConsensusPointwise,
        history.clone(),
        10.0,
        &cfg(step),
    )
    .map_err(err)?;
    let dists = [0.2, 0.1, 0.05]
        .into_par_iter()
        .map(|w| {
            let len = tau + 0.5 * w;
            let model = distributed(n, 1, 1.0, 1.0, DelayLaw::constant(len).unwrap(), hat(tau, w, len));
            integrate(&model, &ControlPolicy::ConsensusDistributed, history.clone(), 10.0, &cfg(step))
                .map(|tr| sup_distance(&tr, &reference))
                .map_err(err)
        })
        .collect::<Result<Vec<_>, String>>()?;
    ensure(
        dists[0] > dists[1] && dists[1] > dists[2],
        format!("distances {dists:?} are not decreasing"),
    )?;
    Ok(format!(
        "sup distance {:.3e} > {:.3e} > {:.3e}",
        dists[0], dists[1], dists[2]
    ))
}

fn self_convergence() -> Check {
    let model = pointwise(2, 1, 1.0, 1.0, DelayLaw::constant(0.5).unwrap());
    // all distances stay below the plateau radius, where the cut-off is smooth
    let history = InitialHistory::sampled(
        vec![-0.5, 0.0],
        vec![
            State::from_agents(&[vec![0.1], vec![0.4], vec![-0.3]]).unwrap(),
            State::from_agents(&[vec![0.0], vec![0.3], vec![-0.4]]).unwrap(),
        ],
    )
    .unwrap();
    let t_end = 5.0;
    let run = |h: f64| integrate(&model, &ControlPolicy::Zero, history.clone(), t_end, &cfg(h)).map_err(err);
    let reference = run(0.0125)?;
    let err_at = |traj: &Trajectory| -> Result<f64, String> {
        let mut worst = 0.0f64;
        for &t in traj.forward_times() {
            let a = traj.lookup(t).map_err(err)?;
            let b = reference.lookup(t).map_err(err)?;
            for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
                worst = worst.max((p - q).abs());
            }
        }
        Ok(worst)
    };
    let e1 = err_at(&run(0.1)?)?;
    let e2 = err_at(&run(0.05)?)?;
    let ratio = e1 / e2;
    ensure(ratio >= 3.5, format!("errors {e1:.3e}, {e2:.3e}, ratio {ratio:.3}"))?;
    Ok(format!("errors {e1:.3e} -> {e2:.3e}, ratio {ratio:.2}"))
}

fn translation() -> Check {
    let shift = 10.0;
    let base = fig2();
    let mut moved = base.clone();
    let agents: Vec<Vec<f64>> = hkdelay::scenario::section6_state()
        .to_agents()
        .into_iter()
        .map(|a| vec![a[0] + shift])
        .collect();
    moved.initial = InitialConfig::Constants { agents };
    moved.policy = match moved.policy {
        PolicyConfig::Waypoint { settle_radius, dwell, max_phase_duration, .. } => PolicyConfig::Waypoint {
            target: vec![FIG2_TARGET + shift],
            settle_radius,
            dwell,
            max_phase_duration,
        },
        other => other,
    };
    let (a, b) = (run_scenario(&base).map_err(err)?, run_scenario(&moved).map_err(err)?);
    let (ta, tb) = (&a.simulation.trajectory, &b.simulation.trajectory);
    ensure(ta.forward_times() == tb.forward_times(), "time grids differ")?;
    let mut worst = 0.0f64;
    for k in 0..ta.forward_times().len() {
        let (x, y) = (ta.state(ta.origin() + k), tb.state(tb.origin() + k));
        for (p, q) in x.as_slice().iter().zip(y.as_slice()) {
            worst = worst.max((q - p - shift).abs());
        }
        let (u, v) = (ta.control(ta.origin() + k), tb.control(tb.origin() + k));
        if let (Some(u), Some(v)) = (u, v) {
            worst = worst.max((u[0] - v[0]).abs());
        }
    }
    for (p, q) in a.report.d0_series.iter().zip(&b.report.d0_series) {
        worst = worst.max((p - q).abs());
    }
    ensure(a.report.phases.len() == b.report.phases.len(), "controller phase sequences differ")?;
    for (p, q) in a.report.phases.iter().zip(&b.report.phases) {
        ensure(p.phase == q.phase && p.t == q.t, format!("phase {:?} at {} vs {:?} at {}", p.phase, p.t, q.phase, q.t))?;
    }
    ensure(worst <= 1e-9, format!("series differ by {worst:.3e}"))?;
    Ok(format!("states, controls and d0 agree within {worst:.1e}; {} phase switches match", a.report.phases.len()))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let checks: [Criterion; 12] = [
        ("boundedness, pointwise delay", boundedness_pointwise),
        ("boundedness, distributed delay", boundedness_distributed),
        ("admissible controls", admissibility),
        ("consensus preset at four delays", consensus_preset),
        ("waypoint preset reaches 4", waypoint_preset),
        ("finite-time steering", steering),
        ("decay with a fixed leader", halanay_decay),
        ("delay bounds against 50-digit oracle", certificates),
        ("Lyapunov functionals non-increasing", lyapunov_monotone),
        ("narrow kernels approach pointwise delay", dirac_limit),
        ("RK4 self-convergence", self_convergence),
        ("translation equivariance", translation),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", k + 1);
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
