//! Certification of solution pairs and motion plans.

use std::fmt;

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::MotionPlanningProblem;
use crate::signal::{dist, SolutionPair};
use crate::system::SystemDefinition;
use crate::time::HybridTime;
use crate::Rng;

/// Tolerance used by [`check_motion_plan`] for the solution-pair conditions.
pub const PLAN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// Arc and input dimensions or grids disagree.
    DomainMismatch,
    /// `(φ(0,0), υ(0,0)) ∉ C̄ ∪ D`.
    InitialPair,
    /// A sample in the interior of a flow interval is outside `C`.
    FlowSet,
    /// The sampled arc does not follow `f` within tolerance.
    FlowDynamics,
    /// A pair just before a jump is outside `D`.
    JumpSet,
    /// The state after a jump is not in `g` of the state before.
    JumpMap,
    /// `φ(0,0) ∉ X0`.
    InitialState,
    /// `φ(T,J)` is farther than `ε` from `Xf`.
    FinalState,
    /// Some sample lies in `Xu`.
    Unsafe,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::DomainMismatch => "domain-mismatch",
            Condition::InitialPair => "initial-pair",
            Condition::FlowSet => "flow-set",
            Condition::FlowDynamics => "flow-dynamics",
            Condition::JumpSet => "jump-set",
            Condition::JumpMap => "jump-map",
            Condition::InitialState => "initial-state",
            Condition::FinalState => "final-state",
            Condition::Unsafe => "unsafe",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub at: HybridTime,
    pub magnitude: f64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} at (t={}, j={})",
            self.condition, self.message, self.at.t, self.at.j
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Largest flow residual seen, normalised by `(1 + |f|) Δt`.
    pub max_flow_residual: f64,
}

impl ValidationReport {
    fn new() -> Self {
        Self {
            valid: true,
            violations: Vec::new(),
            max_flow_residual: 0.0,
        }
    }

    fn push(&mut self, condition: Condition, at: HybridTime, magnitude: f64, message: String) {
        self.valid = false;
        self.violations.push(Violation {
            condition,
            at,
            magnitude,
            message,
        });
    }

    fn merge(&mut self, other: ValidationReport) {
        self.valid &= other.valid;
        self.violations.extend(other.violations);
        self.max_flow_residual = self.max_flow_residual.max(other.max_flow_residual);
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid (max flow residual {:e})", self.max_flow_residual);
        }
        writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Roundoff allowance for differences of states of this size.
fn rounding_floor(a: &[f64], b: &[f64]) -> f64 {
    8.0 * f64::EPSILON * (1.0 + norm(a) + norm(b))
}

/// Checks the three solution-pair conditions on the stored samples:
/// the initial pair lies in `C̄ ∪ D`; interior flow samples lie in `C` and
/// consecutive samples satisfy the trapezoidal residual bound
/// `|Δφ - Δt (f_k + f_{k+1}) / 2| ≤ tol (1 + |f|) Δt`; and every jump starts
/// in `D` and lands in `g` within `tol`.
pub fn validate_solution_pair(
    system: &SystemDefinition,
    pair: &SolutionPair,
    tol: f64,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let origin = HybridTime::new(0.0, 0);
    if pair.state_dim() != system.state_dim || pair.input_dim() != system.input_dim {
        report.push(
            Condition::DomainMismatch,
            origin,
            0.0,
            format!(
                "pair has dimensions ({}, {}), system expects ({}, {})",
                pair.state_dim(),
                pair.input_dim(),
                system.state_dim,
                system.input_dim
            ),
        );
        return report;
    }

    let (x0, u0) = (pair.initial_state(), pair.initial_input());
    if !system.flow_membership(x0, u0) && !system.jump_membership(x0, u0) {
        let d = (system.flow_set_distance)(x0, u0).min((system.jump_set_distance)(x0, u0));
        report.push(
            Condition::InitialPair,
            origin,
            d,
            format!("initial pair {x0:?}, {u0:?} is in neither the flow nor the jump set"),
        );
    }

    let arc = pair.arc().segments();
    let input = pair.input().segments();
    let jumps = arc.len() - 1;
    for (j, (xs, us)) in arc.iter().zip(input).enumerate() {
        let n = xs.len();
        for k in 1..n.saturating_sub(1) {
            let (x, u) = (&xs[k].value, &us[k].value);
            if !system.flow_membership(x, u) {
                report.push(
                    Condition::FlowSet,
                    HybridTime::new(xs[k].t, j),
                    (system.flow_set_distance)(x, u),
                    format!("state {x:?} with input {u:?} is outside the flow set"),
                );
            }
        }
        for k in 0..n.saturating_sub(1) {
            let (a, b) = (&xs[k], &xs[k + 1]);
            let u = &us[k].value;
            let dt = b.t - a.t;
            let fa = system.flow(&a.value, u);
            let fb = system.flow(&b.value, u);
            let mean: Vec<f64> = fa.iter().zip(&fb).map(|(p, q)| 0.5 * (p + q)).collect();
            let residual: Vec<f64> = (0..a.value.len())
                .map(|i| b.value[i] - a.value[i] - dt * mean[i])
                .collect();
            let r = norm(&residual);
            let scale = (1.0 + norm(&mean)) * dt;
            let excess = (r - rounding_floor(&a.value, &b.value)).max(0.0);
            let normalised = excess / scale;
            if !normalised.is_finite() || normalised > tol {
                report.push(
                    Condition::FlowDynamics,
                    HybridTime::new(a.t, j),
                    normalised,
                    format!("flow residual {normalised:e} exceeds {tol:e} over step {dt:e}"),
                );
            }
            if normalised.is_finite() {
                report.max_flow_residual = report.max_flow_residual.max(normalised);
            }
        }
        if j < jumps {
            let (x, u) = (&xs[n - 1].value, &us[n - 1].value);
            let at = HybridTime::new(xs[n - 1].t, j);
            if !system.jump_membership(x, u) {
                report.push(
                    Condition::JumpSet,
                    at,
                    (system.jump_set_distance)(x, u),
                    format!("state {x:?} with input {u:?} is outside the jump set"),
                );
            }
            let next = &arc[j + 1][0].value;
            let image = system.jump(x, u);
            let miss = image
                .iter()
                .map(|g| dist(g, next) - tol * (1.0 + norm(g)) - rounding_floor(g, next))
                .fold(f64::INFINITY, f64::min);
            if miss > 0.0 {
                report.push(
                    Condition::JumpMap,
                    at,
                    miss,
                    format!("post-jump state {next:?} is not in the jump image {image:?}"),
                );
            }
        }
    }
    report
}

/// Checks a candidate motion plan: starts in `X0`, is a solution pair,
/// ends within `eps` of `Xf`, and never visits `Xu`.
pub fn check_motion_plan(
    problem: &MotionPlanningProblem,
    pair: &SolutionPair,
    eps: f64,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let origin = HybridTime::new(0.0, 0);
    if pair.state_dim() != problem.system.state_dim {
        report.merge(validate_solution_pair(&problem.system, pair, PLAN_TOL));
        return report;
    }
    let x0 = pair.initial_state();
    if !problem.in_initial_set(x0) {
        report.push(
            Condition::InitialState,
            origin,
            (problem.x0_distance)(x0),
            format!("initial state {x0:?} is not in the initial set"),
        );
    }
    report.merge(validate_solution_pair(&problem.system, pair, PLAN_TOL));
    let end = pair.max_point().expect("pairs are nonempty");
    let d = problem.goal_distance(pair.final_state());
    if !(d <= eps) {
        report.push(
            Condition::FinalState,
            end,
            d,
            format!("final-state distance {d:?} > {eps:?}"),
        );
    }
    for (at, x, u) in pair.iter_samples() {
        if problem.is_unsafe(x, u) {
            report.push(
                Condition::Unsafe,
                at,
                0.0,
                format!("sample {x:?} with input {u:?} is in the unsafe set"),
            );
        }
    }
    report
}

/// Points of the closed ball of radius `delta` around `center`: the center,
/// the `2n` axis extremes, and `n_random` random points.
fn ball_points(center: &[f64], delta: f64, n_random: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![center.to_vec()];
    for i in 0..center.len() {
        for s in [-1.0, 1.0] {
            let mut p = center.to_vec();
            p[i] += s * delta;
            pts.push(p);
        }
    }
    for _ in 0..n_random {
        let mut dir: Vec<f64> = center.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        let len = norm(&dir);
        if len > 1.0 {
            dir.iter_mut().for_each(|v| *v /= len);
        }
        pts.push(center.iter().zip(&dir).map(|(c, d)| c + delta * d).collect());
    }
    pts
}

/// Sampled approximation of "the plan has clearance at least `delta`": the
/// balls around the endpoints stay in `X0` / `Xf`, balls around samples
/// avoid `Xu`, balls around flow samples stay in `C`, and balls around
/// pre-jump samples stay in `D`. A `false` is always backed by a concrete
/// witness point; a `true` is only as good as the sampling.
pub fn check_clearance(
    problem: &MotionPlanningProblem,
    pair: &SolutionPair,
    delta: f64,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<bool> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let system = &problem.system;
    let x_ball = |x: &[f64], rng: &mut Rng| ball_points(x, delta, n_samples, rng);
    if !x_ball(pair.initial_state(), rng)
        .iter()
        .all(|p| problem.in_initial_set(p))
    {
        return Ok(false);
    }
    if !x_ball(pair.final_state(), rng)
        .iter()
        .all(|p| problem.goal_distance(p) <= crate::system::MEMBERSHIP_TOL)
    {
        return Ok(false);
    }

    let arc = pair.arc().segments();
    let input = pair.input().segments();
    let jumps = arc.len() - 1;
    for (j, (xs, us)) in arc.iter().zip(input).enumerate() {
        let flows = xs.len() > 1;
        for (k, (xk, uk)) in xs.iter().zip(us).enumerate() {
            let is_jump = j < jumps && k + 1 == xs.len();
            let xb = x_ball(&xk.value, rng);
            let ub = ball_points(&uk.value, delta, n_samples, rng);
            let pairs = xb
                .iter()
                .map(|x| (x, &uk.value))
                .chain(ub.iter().map(|u| (&xk.value, u)))
                .chain(xb.iter().zip(&ub));
            for (x, u) in pairs {
                if problem.is_unsafe(x, u)
                    || (flows && !system.flow_membership(x, u))
                    || (is_jump && !system.jump_membership(x, u))
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
