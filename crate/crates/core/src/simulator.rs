//! Flow simulation with fixed-step integration and zero-crossing detection,
//! and single-jump simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::MotionPlanningProblem;
use crate::signal::{HybridSignal, Sample, SolutionPair};
use crate::system::{SystemDefinition, MEMBERSHIP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitEuler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4,
            step: 1e-3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("step", format!("must be positive, got {}", self.step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroCrossingConfig {
    pub time_tolerance: f64,
    pub max_bisections: u32,
}

impl Default for ZeroCrossingConfig {
    fn default() -> Self {
        Self {
            time_tolerance: 1e-6,
            max_bisections: 60,
        }
    }
}

impl ZeroCrossingConfig {
    pub fn validate(&self, integ: &IntegratorConfig) -> Result<()> {
        if !(self.time_tolerance > 0.0) {
            return Err(Error::param("time_tolerance", "must be positive"));
        }
        if self.time_tolerance > integ.step {
            return Err(Error::param(
                "time_tolerance",
                format!(
                    "{} exceeds the integrator step {}",
                    self.time_tolerance, integ.step
                ),
            ));
        }
        Ok(())
    }
}

/// Behaviour on `C ∩ D`: rule 1 stops flowing there, rule 2 keeps flowing
/// while the flow set allows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PriorityRule {
    JumpPriority = 1,
    FlowPriority = 2,
}

impl TryFrom<u8> for PriorityRule {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::JumpPriority),
            2 => Ok(Self::FlowPriority),
            other => Err(Error::param("rule", format!("must be 1 or 2, got {other}"))),
        }
    }
}

impl From<PriorityRule> for u8 {
    fn from(r: PriorityRule) -> u8 {
        r as u8
    }
}

/// A constant input `value` applied over `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputSignal {
    pub value: Vec<f64>,
    pub duration: f64,
}

/// A flow map `f(x, u)` borrowed for one integration step.
pub type VectorField<'a> = dyn Fn(&[f64], &[f64]) -> Vec<f64> + 'a;

/// One explicit step `x_{k+1} = x_k + ...` of the chosen scheme.
pub fn integrate_step(
    flow: &VectorField<'_>,
    x: &[f64],
    u: &[f64],
    step: f64,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], s: f64, d: &[f64]| -> Vec<f64> {
        a.iter().zip(d).map(|(ai, di)| ai + s * di).collect()
    };
    let next = match scheme {
        Scheme::ExplicitEuler => axpy(x, step, &flow(x, u)),
        Scheme::Rk4 => {
            let k1 = flow(x, u);
            let k2 = flow(&axpy(x, 0.5 * step, &k1), u);
            let k3 = flow(&axpy(x, 0.5 * step, &k2), u);
            let k4 = flow(&axpy(x, step, &k3), u);
            (0..x.len())
                .map(|i| x[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    if next.len() != x.len() || next.iter().any(|v| !v.is_finite()) {
        return Err(Error::FlowMapDiverged);
    }
    Ok(next)
}

/// Samples of the numerical solution on a uniform grid over
/// `[0, duration]`; the step is shrunk so that the grid ends exactly at
/// `duration`.
pub fn integrate(
    system: &SystemDefinition,
    x0: &[f64],
    u: &[f64],
    duration: f64,
    integ: &IntegratorConfig,
) -> Result<Vec<Sample>> {
    integ.validate()?;
    let steps = (duration / integ.step).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let flow = |x: &[f64], u: &[f64]| system.flow(x, u);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(Sample::new(0.0, x0.to_vec()));
    let mut x = x0.to_vec();
    for k in 1..=steps {
        x = integrate_step(&flow, &x, u, h, integ.scheme)?;
        let t = if k == steps { duration } else { k as f64 * h };
        out.push(Sample::new(t, x.clone()));
    }
    Ok(out)
}

/// Whether `(x, u)` may keep flowing under `rule`: in `C` for rule 2, in
/// `C \ D` for rule 1.
fn may_flow(system: &SystemDefinition, rule: PriorityRule, x: &[f64], u: &[f64]) -> bool {
    let in_c = system.flow_zero_crossing(x, u) >= -MEMBERSHIP_TOL;
    match rule {
        PriorityRule::FlowPriority => in_c,
        PriorityRule::JumpPriority => in_c && !system.jump_membership(x, u),
    }
}

struct Crossing {
    t: f64,
    x: Vec<f64>,
    /// Index of the last grid sample kept before the crossing point.
    last_kept: usize,
}

fn locate_crossing(
    system: &SystemDefinition,
    rule: PriorityRule,
    trajectory: &[Sample],
    u: &[f64],
    integ: &IntegratorConfig,
    zc: &ZeroCrossingConfig,
) -> Result<Option<Crossing>> {
    let Some(k) = trajectory.iter().position(|s| !may_flow(system, rule, &s.value, u)) else {
        return Ok(None);
    };
    if k == 0 {
        return Ok(Some(Crossing {
            t: 0.0,
            x: trajectory[0].value.clone(),
            last_kept: 0,
        }));
    }
    let base = &trajectory[k - 1];
    let flow = |x: &[f64], u: &[f64]| system.flow(x, u);
    let state_at = |t: f64| -> Result<Vec<f64>> {
        if t == base.t {
            Ok(base.value.clone())
        } else {
            integrate_step(&flow, &base.value, u, t - base.t, integ.scheme)
        }
    };
    let (mut lo, mut hi) = (base.t, trajectory[k].t);
    let (mut x_lo, mut x_hi) = (base.value.clone(), trajectory[k].value.clone());
    let mut iterations = 0;
    // Keep refining until the end state is on the boundary to within the
    // membership tolerance, not just until the bracket is short; under rule 1
    // reaching a point of C ∩ D from above is enough.
    let on_boundary = |x_lo: &[f64], x_hi: &[f64]| {
        system.flow_zero_crossing(x_lo, u).abs() <= MEMBERSHIP_TOL
            || (rule == PriorityRule::JumpPriority
                && system.flow_membership(x_hi, u)
                && system.jump_membership(x_hi, u))
    };
    let needs_more = |lo: f64, hi: f64, x_lo: &[f64], x_hi: &[f64]| {
        hi - lo > zc.time_tolerance || !on_boundary(x_lo, x_hi)
    };
    while iterations < zc.max_bisections && needs_more(lo, hi, &x_lo, &x_hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let x_mid = state_at(mid)?;
        if may_flow(system, rule, &x_mid, u) {
            lo = mid;
            x_lo = x_mid;
        } else {
            hi = mid;
            x_hi = x_mid;
        }
        iterations += 1;
    }
    // Under rule 1 the flow may end on the first point of D it reaches.
    let end_on_hi = rule == PriorityRule::JumpPriority
        && system.flow_membership(&x_hi, u)
        && system.jump_membership(&x_hi, u);
    let (t, x) = if end_on_hi { (hi, x_hi) } else { (lo, x_lo) };
    Ok(Some(Crossing {
        t,
        x,
        last_kept: k - 1,
    }))
}

/// `t̂`: the end of the longest initial stretch of `trajectory` along which
/// flowing is allowed under `rule`, refined by bisection. `None` when the
/// whole trajectory may flow.
pub fn zero_crossing_time(
    system: &SystemDefinition,
    trajectory: &[Sample],
    input: &ConstantInputSignal,
    rule: PriorityRule,
    integ: &IntegratorConfig,
    zc: &ZeroCrossingConfig,
) -> Result<Option<f64>> {
    Ok(locate_crossing(system, rule, trajectory, &input.value, integ, zc)?.map(|c| c.t))
}

/// Maximal flow from `x0` under a constant input: integrates over the
/// input's duration and truncates at the first zero crossing.
pub fn continuous_simulator(
    system: &SystemDefinition,
    rule: PriorityRule,
    x0: &[f64],
    input: &ConstantInputSignal,
    integ: &IntegratorConfig,
    zc: &ZeroCrossingConfig,
) -> Result<SolutionPair> {
    integ.validate()?;
    zc.validate(integ)?;
    let u = &input.value;
    if x0.len() != system.state_dim {
        return Err(Error::DimensionMismatch {
            expected: system.state_dim,
            got: x0.len(),
        });
    }
    if u.len() != system.input_dim {
        return Err(Error::DimensionMismatch {
            expected: system.input_dim,
            got: u.len(),
        });
    }
    if !system.flow_membership(x0, u) {
        return Err(Error::NotInFlowSet);
    }
    if !(input.duration >= 0.0 && input.duration.is_finite()) {
        return Err(Error::param("duration", "must be a nonnegative finite time"));
    }
    if input.duration == 0.0 {
        return Ok(SolutionPair::point(x0.to_vec(), u.clone()));
    }
    let mut samples = integrate(system, x0, u, input.duration, integ)?;
    if let Some(c) = locate_crossing(system, rule, &samples, u, integ, zc)? {
        samples.truncate(c.last_kept + 1);
        if c.t > samples[c.last_kept].t {
            samples.push(Sample::new(c.t, c.x));
        } else {
            samples[c.last_kept].value = c.x;
        }
    }
    let inputs = samples.iter().map(|s| Sample::new(s.t, u.clone())).collect();
    SolutionPair::new(
        HybridSignal::from_flow(system.state_dim, samples)?,
        HybridSignal::from_flow(system.input_dim, inputs)?,
    )
}

/// One jump from `(x0, u_d) ∈ D`. The input after the jump is free; it is
/// chosen outside `Xu` when a problem is supplied, and zero otherwise.
pub fn discrete_simulator(
    system: &SystemDefinition,
    x0: &[f64],
    u_d: &[f64],
    problem: Option<&MotionPlanningProblem>,
) -> Result<SolutionPair> {
    if x0.len() != system.state_dim {
        return Err(Error::DimensionMismatch {
            expected: system.state_dim,
            got: x0.len(),
        });
    }
    if u_d.len() != system.input_dim {
        return Err(Error::DimensionMismatch {
            expected: system.input_dim,
            got: u_d.len(),
        });
    }
    if !system.jump_membership(x0, u_d) {
        return Err(Error::NotInJumpSet);
    }
    let x1 = system
        .jump(x0, u_d)
        .into_iter()
        .next()
        .ok_or(Error::EmptyJumpImage)?;
    let p = match problem {
        Some(problem) => problem.safe_input(&x1, u_d),
        None => vec![0.0; system.input_dim],
    };
    let arc = HybridSignal::new(
        system.state_dim,
        vec![vec![Sample::new(0.0, x0.to_vec())], vec![Sample::new(0.0, x1)]],
    )?;
    let input = HybridSignal::new(
        system.input_dim,
        vec![vec![Sample::new(0.0, u_d.to_vec())], vec![Sample::new(0.0, p)]],
    )?;
    SolutionPair::new(arc, input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{bouncing_ball, GRAVITY};
    use crate::time::Interval;

    fn input(u: f64, duration: f64) -> ConstantInputSignal {
        ConstantInputSignal {
            value: vec![u],
            duration,
        }
    }

    #[test]
    fn euler_step_by_hand() {
        let h = bouncing_ball();
        let f = |x: &[f64], u: &[f64]| h.flow(x, u);
        let x = integrate_step(&f, &[15.0, 0.0], &[1.0], 0.01, Scheme::ExplicitEuler).unwrap();
        assert_eq!(x[0], 15.0);
        assert!((x[1] + 0.0981).abs() < 1e-15);
    }

    #[test]
    fn rk4_on_zero_field() {
        let f = |_x: &[f64], _u: &[f64]| vec![0.0, 0.0];
        for step in [1e-3, 0.5, 10.0] {
            let x = integrate_step(&f, &[1.5, -2.0], &[0.0], step, Scheme::Rk4).unwrap();
            assert_eq!(x, vec![1.5, -2.0]);
        }
    }

    #[test]
    fn diverging_field_is_an_error() {
        let f = |_x: &[f64], _u: &[f64]| vec![f64::NAN];
        assert_eq!(
            integrate_step(&f, &[0.0], &[0.0], 0.1, Scheme::Rk4),
            Err(Error::FlowMapDiverged)
        );
    }

    #[test]
    fn ballistic_rk4_to_one_second() {
        let h = bouncing_ball();
        let s = integrate(&h, &[15.0, 0.0], &[1.0], 1.0, &IntegratorConfig::default()).unwrap();
        let end = &s.last().unwrap().value;
        assert!((end[0] - (15.0 - 0.5 * GRAVITY)).abs() < 1e-9);
        assert!((end[1] + GRAVITY).abs() < 1e-9);
    }

    #[test]
    fn flow_without_crossing() {
        let h = bouncing_ball();
        let p = continuous_simulator(
            &h,
            PriorityRule::FlowPriority,
            &[15.0, 0.0],
            &input(1.0, 1.0),
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        )
        .unwrap();
        assert_eq!(p.domain().intervals(), &[Interval::new(0, 0.0, 1.0)]);
        assert!((p.final_state()[0] - 10.095).abs() < 1e-9);
    }

    #[test]
    fn flow_truncated_at_impact() {
        let h = bouncing_ball();
        let p = continuous_simulator(
            &h,
            PriorityRule::FlowPriority,
            &[15.0, 0.0],
            &input(1.0, 2.0),
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        )
        .unwrap();
        let end = p.max_point().unwrap();
        assert!((end.t - (30.0 / GRAVITY).sqrt()).abs() <= 1e-6);
        assert!(p.final_state()[0].abs() <= MEMBERSHIP_TOL);
        assert!((p.final_state()[1] + 17.15511).abs() < 1e-4);
        assert!(h.jump_membership(p.final_state(), &[0.5]));
    }

    #[test]
    fn crossing_time_is_none_inside() {
        let h = bouncing_ball();
        let traj = integrate(&h, &[15.0, 0.0], &[1.0], 1.0, &IntegratorConfig::default()).unwrap();
        let t = zero_crossing_time(
            &h,
            &traj,
            &input(1.0, 1.0),
            PriorityRule::FlowPriority,
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        )
        .unwrap();
        assert_eq!(t, None);
    }

    #[test]
    fn rule_one_stops_in_jump_set() {
        let h = bouncing_ball();
        let p = continuous_simulator(
            &h,
            PriorityRule::JumpPriority,
            &[0.0, -1.0],
            &input(1.0, 0.5),
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        )
        .unwrap();
        assert!(p.is_trivial());
        assert_eq!(p.max_point().unwrap().t, 0.0);
    }

    #[test]
    fn rule_two_from_ground_is_trivial() {
        let h = bouncing_ball();
        let p = continuous_simulator(
            &h,
            PriorityRule::FlowPriority,
            &[0.0, -1.0],
            &input(1.0, 0.5),
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        )
        .unwrap();
        assert!(p.max_point().unwrap().t < 1e-6);
    }

    #[test]
    fn flow_precondition() {
        let h = bouncing_ball();
        let r = continuous_simulator(
            &h,
            PriorityRule::FlowPriority,
            &[-1.0, 0.0],
            &input(1.0, 0.5),
            &IntegratorConfig::default(),
            &ZeroCrossingConfig::default(),
        );
        assert_eq!(r.unwrap_err(), Error::NotInFlowSet);
    }

    #[test]
    fn jump_examples() {
        let h = bouncing_ball();
        let p = discrete_simulator(&h, &[0.0, -17.1551], &[0.28305], None).unwrap();
        assert!((p.final_state()[1] - 14.00713).abs() < 1e-5);
        assert_eq!(
            p.domain().intervals(),
            &[Interval::new(0, 0.0, 0.0), Interval::new(1, 0.0, 0.0)]
        );
        let rest = discrete_simulator(&h, &[0.0, 0.0], &[0.0], None).unwrap();
        assert_eq!(rest.final_state(), &[0.0, 0.0]);
        assert_eq!(
            discrete_simulator(&h, &[1.0, -1.0], &[0.0], None).unwrap_err(),
            Error::NotInJumpSet
        );
    }

    #[test]
    fn post_jump_input_avoids_unsafe_set() {
        let problem = MotionPlanningProblem::bouncing_ball();
        let p = discrete_simulator(&problem.system, &[0.0, -1.0], &[0.0], Some(&problem)).unwrap();
        let after = p.input().segments()[1][0].value.clone();
        assert!(!problem.is_unsafe(p.final_state(), &after));
    }
}
