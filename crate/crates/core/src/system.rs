//! Hybrid system definitions `H = (C, f, D, g)`.
//!
//! Sets are described by distance functions rather than geometry. For a set
//! `K ⊂ R^n x R^m` the distance used throughout is
//! `d_K(x, u) = inf_{(y, v) ∈ K} max(|x - y|, |u - v|)`, so that the
//! δ-inflation `K_δ = {d_K ≤ δ}` has distance `max(0, d_K - δ)`. Projections
//! onto the state space (`C'`, `D'`) carry their own state-only distances.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::library::InputBox;
use crate::Rng;

/// Tolerance applied to set distances and zero-crossing values when deciding
/// membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub type FlowMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type JumpMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type PairFunction = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type StateFunction = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type StateSampler = Arc<dyn Fn(&mut Rng) -> Vec<f64> + Send + Sync>;

/// Everything needed to describe the jump part of the backward-in-time
/// system: the preimage map of `g`, the set where it is nonempty, and that
/// set's state projection.
#[derive(Clone)]
pub struct JumpInverse {
    pub map: JumpMap,
    pub set_distance: PairFunction,
    pub projection_distance: StateFunction,
    pub state_sampler: StateSampler,
}

#[derive(Clone)]
pub struct SystemDefinition {
    pub name: String,
    pub state_dim: usize,
    pub input_dim: usize,
    pub flow_map: FlowMap,
    /// Finite set of successors; a singleton for forward systems.
    pub jump_map: JumpMap,
    pub flow_set_distance: PairFunction,
    pub jump_set_distance: PairFunction,
    /// Signed: positive in the interior of `C`, zero on its boundary,
    /// negative outside.
    pub flow_zero_crossing: PairFunction,
    /// Distance from a state to `C'`.
    pub flow_projection_distance: StateFunction,
    /// Distance from a state to `D'`.
    pub jump_projection_distance: StateFunction,
    pub flow_state_sampler: StateSampler,
    pub jump_state_sampler: StateSampler,
    pub flow_input_range: InputBox,
    pub jump_input_range: InputBox,
    pub jump_inverse: Option<JumpInverse>,
}

impl fmt::Debug for SystemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDefinition")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("backward_available", &self.jump_inverse.is_some())
            .finish_non_exhaustive()
    }
}

impl SystemDefinition {
    pub fn flow(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.flow_map)(x, u)
    }

    pub fn jump(&self, x: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
        (self.jump_map)(x, u)
    }

    /// `(x, u) ∈ C` (closed, up to [`MEMBERSHIP_TOL`]).
    pub fn flow_membership(&self, x: &[f64], u: &[f64]) -> bool {
        (self.flow_set_distance)(x, u) <= MEMBERSHIP_TOL
    }

    /// `(x, u) ∈ D` (closed, up to [`MEMBERSHIP_TOL`]).
    pub fn jump_membership(&self, x: &[f64], u: &[f64]) -> bool {
        (self.jump_set_distance)(x, u) <= MEMBERSHIP_TOL
    }

    pub fn flow_zero_crossing(&self, x: &[f64], u: &[f64]) -> f64 {
        (self.flow_zero_crossing)(x, u)
    }

    /// `x ∈ C'`.
    pub fn in_flow_projection(&self, x: &[f64]) -> bool {
        (self.flow_projection_distance)(x) <= MEMBERSHIP_TOL
    }

    /// `x ∈ D'`.
    pub fn in_jump_projection(&self, x: &[f64]) -> bool {
        (self.jump_projection_distance)(x) <= MEMBERSHIP_TOL
    }

    pub fn sample_flow_state(&self, rng: &mut Rng) -> Vec<f64> {
        (self.flow_state_sampler)(rng)
    }

    pub fn sample_jump_state(&self, rng: &mut Rng) -> Vec<f64> {
        (self.jump_state_sampler)(rng)
    }
}

/// Parameters of the actuated bouncing ball.
pub const GRAVITY: f64 = 9.81;
pub const RESTITUTION: f64 = 0.8;
/// Extent of the state box sampled for `C'`: `x1 ∈ [0, 20]`, `x2 ∈ [-20, 20]`.
pub const BALL_HEIGHT_MAX: f64 = 20.0;
pub const BALL_SPEED_MAX: f64 = 20.0;

/// Distance from `(x1, x2)` to the half-line `{x1 = 0, x2 ≤ 0}`.
fn ground_distance(x: &[f64]) -> f64 {
    if x[1] <= 0.0 {
        x[0].abs()
    } else {
        x[0].hypot(x[1])
    }
}

/// Distance from `(x1, x2)` to the half-line `{x1 = 0, x2 ≥ a}`.
fn rising_distance(x: &[f64], a: f64) -> f64 {
    if x[1] >= a {
        x[0].abs()
    } else {
        x[0].hypot(x[1] - a)
    }
}

/// The actuated bouncing ball: height `x1`, velocity `x2`, and an impulsive
/// input `u` applied at impacts.
///
/// `f = (x2, -γ)` on `C = {x1 ≥ 0}`; `g = (x1, -λ x2 + u)` on
/// `D = {x1 = 0, x2 ≤ 0, u ≥ 0}`.
pub fn bouncing_ball() -> SystemDefinition {
    let input_range = InputBox::interval(0.0, 5.0).expect("valid box");
    SystemDefinition {
        name: "bouncing-ball".into(),
        state_dim: 2,
        input_dim: 1,
        flow_map: Arc::new(|x, _u| vec![x[1], -GRAVITY]),
        jump_map: Arc::new(|x, u| vec![vec![x[0], -RESTITUTION * x[1] + u[0]]]),
        flow_set_distance: Arc::new(|x, _u| (-x[0]).max(0.0)),
        jump_set_distance: Arc::new(|x, u| ground_distance(x).max((-u[0]).max(0.0))),
        flow_zero_crossing: Arc::new(|x, _u| x[0]),
        flow_projection_distance: Arc::new(|x| (-x[0]).max(0.0)),
        jump_projection_distance: Arc::new(ground_distance),
        flow_state_sampler: Arc::new(|rng| {
            vec![
                rng.random_range(0.0..=BALL_HEIGHT_MAX),
                rng.random_range(-BALL_SPEED_MAX..=BALL_SPEED_MAX),
            ]
        }),
        jump_state_sampler: Arc::new(|rng| vec![0.0, rng.random_range(-BALL_SPEED_MAX..=0.0)]),
        flow_input_range: input_range.clone(),
        jump_input_range: input_range,
        // g(z, u) = x  ⇔  z = (x1, (u - x2) / λ); z ∈ D needs x2 ≥ u ≥ 0.
        jump_inverse: Some(JumpInverse {
            map: Arc::new(|x, u| vec![vec![x[0], (u[0] - x[1]) / RESTITUTION]]),
            set_distance: Arc::new(|x, u| rising_distance(x, u[0]).max((-u[0]).max(0.0))),
            projection_distance: Arc::new(|x| rising_distance(x, 0.0)),
            state_sampler: Arc::new(|rng| vec![0.0, rng.random_range(0.0..=BALL_SPEED_MAX)]),
        }),
    }
}

/// Zero-crossing function of `K_δ` built from `h` and `d_K`: positive inside
/// `K_δ`, zero on its boundary, negative outside.
fn inflated_zero_crossing(h: f64, d: f64, delta: f64) -> f64 {
    if d > 0.0 {
        delta - d
    } else {
        delta + h.max(0.0)
    }
}

fn widened_sampler(base: StateSampler, delta: f64) -> StateSampler {
    Arc::new(move |rng| {
        let mut x = base(rng);
        let half = delta / (x.len() as f64).sqrt();
        for xi in &mut x {
            *xi += rng.random_range(-half..=half);
        }
        x
    })
}

/// The δ-inflation `H_δ`: `C` and `D` are replaced by the sets of pairs
/// within `δ` (in state and in input) of them. Maps are unchanged.
pub fn inflate(system: &SystemDefinition, delta: f64) -> Result<SystemDefinition> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let s = system.clone();
    let (c_dist, d_dist) = (s.flow_set_distance.clone(), s.jump_set_distance.clone());
    let (c_proj, d_proj) = (s.flow_projection_distance.clone(), s.jump_projection_distance.clone());
    let zc = s.flow_zero_crossing.clone();
    let c_dist_zc = c_dist.clone();
    let widen = |b: &InputBox| {
        InputBox::new(
            b.min.iter().map(|v| v - delta).collect(),
            b.max.iter().map(|v| v + delta).collect(),
        )
        .expect("widening keeps the box valid")
    };
    Ok(SystemDefinition {
        name: format!("{}+inflate({delta})", s.name),
        flow_set_distance: Arc::new(move |x, u| (c_dist(x, u) - delta).max(0.0)),
        jump_set_distance: Arc::new(move |x, u| (d_dist(x, u) - delta).max(0.0)),
        flow_zero_crossing: Arc::new(move |x, u| {
            inflated_zero_crossing(zc(x, u), c_dist_zc(x, u), delta)
        }),
        flow_projection_distance: Arc::new(move |x| (c_proj(x) - delta).max(0.0)),
        jump_projection_distance: Arc::new(move |x| (d_proj(x) - delta).max(0.0)),
        flow_state_sampler: widened_sampler(s.flow_state_sampler.clone(), delta),
        jump_state_sampler: widened_sampler(s.jump_state_sampler.clone(), delta),
        flow_input_range: widen(&s.flow_input_range),
        jump_input_range: widen(&s.jump_input_range),
        jump_inverse: None,
        ..s
    })
}

/// The backward-in-time system: `C^bw = C`, `f^bw = -f`,
/// `g^bw(x, u) = {z : x = g(z, u)}` and `D^bw` the pairs where that
/// preimage meets `D`.
pub fn backward(system: &SystemDefinition) -> Result<SystemDefinition> {
    let inverse = system.jump_inverse.clone().ok_or(Error::BackwardUnavailable)?;
    let f = system.flow_map.clone();
    Ok(SystemDefinition {
        name: format!("{}+backward", system.name),
        flow_map: Arc::new(move |x, u| f(x, u).into_iter().map(|v| -v).collect()),
        jump_map: inverse.map,
        jump_set_distance: inverse.set_distance,
        jump_projection_distance: inverse.projection_distance,
        jump_state_sampler: inverse.state_sampler,
        jump_inverse: Some(JumpInverse {
            map: system.jump_map.clone(),
            set_distance: system.jump_set_distance.clone(),
            projection_distance: system.jump_projection_distance.clone(),
            state_sampler: system.jump_state_sampler.clone(),
        }),
        ..system.clone()
    })
}
