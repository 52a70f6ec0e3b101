//! Random bouncing-ball solution pairs built from the simulators.
#![allow(dead_code)]

use hyrrt_core::simulator::{
    continuous_simulator, discrete_simulator, ConstantInputSignal, IntegratorConfig,
    PriorityRule, ZeroCrossingConfig,
};
use hyrrt_core::{SolutionPair, SystemDefinition};
use rand::{Rng, RngCore};

pub fn integ() -> IntegratorConfig {
    IntegratorConfig::default()
}

pub fn zc() -> ZeroCrossingConfig {
    ZeroCrossingConfig::default()
}

/// A random state in the flow set, away from the ground.
pub fn random_start(rng: &mut dyn RngCore) -> Vec<f64> {
    vec![rng.random_range(0.5..15.0), rng.random_range(-10.0..10.0)]
}

fn on_ground(x: &[f64]) -> bool {
    x[0].abs() <= 1e-9 && x[1] <= 0.0
}

/// Alternates flows and impacts from `x0` for `pieces` steps. A flow that
/// cannot advance (the ball is on the ground moving down) is replaced by a
/// jump, so every piece makes progress.
pub fn simulate_from(
    system: &SystemDefinition,
    x0: &[f64],
    pieces: usize,
    rng: &mut dyn RngCore,
) -> SolutionPair {
    let mut pair: Option<SolutionPair> = None;
    let mut x = x0.to_vec();
    for _ in 0..pieces {
        let piece = if on_ground(&x) {
            let u = rng.random_range(0.05..5.0);
            discrete_simulator(system, &x, &[u], None).expect("ground state is in D")
        } else {
            let input = ConstantInputSignal {
                value: vec![rng.random_range(0.05..5.0)],
                duration: rng.random_range(0.05..2.5),
            };
            continuous_simulator(system, PriorityRule::FlowPriority, &x, &input, &integ(), &zc())
                .expect("state is in C")
        };
        x = piece.final_state().to_vec();
        pair = Some(match pair {
            None => piece,
            Some(p) => p.concatenate(&piece).expect("compact prefix"),
        });
    }
    pair.expect("at least one piece")
}

pub fn random_pair(system: &SystemDefinition, rng: &mut dyn RngCore) -> SolutionPair {
    let x0 = random_start(rng);
    let pieces = rng.random_range(1..=5);
    simulate_from(system, &x0, pieces, rng)
}

/// Replayable piece list: each entry is `(u, duration)`. A piece starting on
/// the ground is an impact with input `u`; any other piece is a flow.
pub type Script = Vec<(f64, f64)>;

pub fn random_script(rng: &mut dyn RngCore) -> Script {
    let pieces = rng.random_range(1..=5);
    (0..pieces)
        .map(|_| (rng.random_range(0.5..4.5), rng.random_range(0.05..2.5)))
        .collect()
}

/// Copy of `script` with every input and duration moved by at most `size`.
pub fn perturb_script(script: &Script, size: f64, rng: &mut dyn RngCore) -> Script {
    script
        .iter()
        .map(|&(u, d)| {
            (
                u + rng.random_range(-size..=size),
                (d + rng.random_range(-size..=size)).max(0.01),
            )
        })
        .collect()
}

/// Replays `script` from `x0`; `None` if a piece cannot be simulated.
pub fn run_script(system: &SystemDefinition, x0: &[f64], script: &Script) -> Option<SolutionPair> {
    let mut pair: Option<SolutionPair> = None;
    let mut x = x0.to_vec();
    for &(u, duration) in script {
        let piece = if on_ground(&x) {
            discrete_simulator(system, &x, &[u], None).ok()?
        } else {
            let input = ConstantInputSignal {
                value: vec![u],
                duration,
            };
            continuous_simulator(system, PriorityRule::FlowPriority, &x, &input, &integ(), &zc())
                .ok()?
        };
        x = piece.final_state().to_vec();
        pair = Some(match pair {
            None => piece,
            Some(p) => p.concatenate(&piece).ok()?,
        });
    }
    pair
}

/// `T + J` at the end of a compact pair.
pub fn horizon(pair: &SolutionPair) -> f64 {
    let end = pair.max_point().expect("compact");
    end.t + end.j as f64
}

/// Smallest `eps` on a geometric grid for which the arcs are
/// `(tau, eps)`-close with `tau = max(T + J, T' + J')`. Closeness only gets
/// easier as `eps` grows, so the grid is bisected.
pub fn tightest_eps(a: &SolutionPair, b: &SolutionPair) -> Option<f64> {
    let tau = horizon(a).max(horizon(b));
    let grid = |k: i32| 1e-4 * 1.25f64.powi(k);
    let close = |k: i32| hyrrt_core::signal::are_close(a.arc(), b.arc(), tau, grid(k));
    let (mut lo, mut hi) = (0, 42);
    if !close(hi) {
        return None;
    }
    if close(lo) {
        return Some(grid(lo));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if close(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(grid(hi))
}
