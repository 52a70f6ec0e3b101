//! Motion planning problems `(X0, Xf, Xu, H)` and the built-in registry.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::system::{self, StateFunction, StateSampler, SystemDefinition, MEMBERSHIP_TOL};
use crate::Rng;

pub type UnsafeSet = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct MotionPlanningProblem {
    pub name: String,
    pub system: SystemDefinition,
    pub x0_sampler: StateSampler,
    /// Distance to `X0`; zero exactly on `X0`.
    pub x0_distance: StateFunction,
    /// Distance to `Xf`; zero exactly on `Xf`.
    pub xf_distance: StateFunction,
    pub unsafe_membership: UnsafeSet,
}

impl fmt::Debug for MotionPlanningProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MotionPlanningProblem")
            .field("name", &self.name)
            .field("system", &self.system)
            .finish_non_exhaustive()
    }
}

/// Names accepted by [`MotionPlanningProblem::by_name`].
pub const BUILTIN_PROBLEMS: &[&str] = &["bouncing-ball", "bouncing-ball-regions"];

const BALL_START: [f64; 2] = [15.0, 0.0];
const BALL_GOAL: [f64; 2] = [10.0, 0.0];

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    crate::signal::dist(a, b)
}

fn ball_sampler(center: [f64; 2], radius: f64) -> StateSampler {
    Arc::new(move |rng: &mut Rng| {
        if radius == 0.0 {
            return center.to_vec();
        }
        loop {
            let p = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
            if p[0] * p[0] + p[1] * p[1] <= 1.0 {
                return vec![center[0] + radius * p[0], center[1] + radius * p[1]];
            }
        }
    })
}

fn ball_distance(center: [f64; 2], radius: f64) -> StateFunction {
    Arc::new(move |x| (euclid(x, &center) - radius).max(0.0))
}

impl MotionPlanningProblem {
    /// The bouncing-ball instance: `X0 = {(15, 0)}`, `Xf = {(10, 0)}`, and
    /// inputs outside `(0, 5)` unsafe.
    pub fn bouncing_ball() -> Self {
        Self::bouncing_ball_with_regions(0.0)
    }

    /// Bouncing ball with `X0` and `Xf` enlarged to closed discs of the given
    /// radius, so that plans can have positive safety clearance.
    pub fn bouncing_ball_with_regions(radius: f64) -> Self {
        let name = if radius == 0.0 {
            "bouncing-ball".to_string()
        } else {
            "bouncing-ball-regions".to_string()
        };
        Self {
            name,
            system: system::bouncing_ball(),
            x0_sampler: ball_sampler(BALL_START, radius),
            x0_distance: ball_distance(BALL_START, radius),
            xf_distance: ball_distance(BALL_GOAL, radius),
            unsafe_membership: Arc::new(|_x, u| u[0] <= 0.0 || u[0] >= 5.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "bouncing-ball" => Ok(Self::bouncing_ball()),
            "bouncing-ball-regions" => Ok(Self::bouncing_ball_with_regions(0.5)),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    /// Same problem posed on another system, e.g. an inflated one.
    pub fn with_system(&self, system: SystemDefinition) -> Self {
        Self {
            system,
            ..self.clone()
        }
    }

    pub fn in_initial_set(&self, x: &[f64]) -> bool {
        (self.x0_distance)(x) <= MEMBERSHIP_TOL
    }

    pub fn goal_distance(&self, x: &[f64]) -> f64 {
        (self.xf_distance)(x)
    }

    pub fn is_unsafe(&self, x: &[f64], u: &[f64]) -> bool {
        (self.unsafe_membership)(x, u)
    }

    pub fn sample_initial(&self, rng: &mut Rng) -> Vec<f64> {
        (self.x0_sampler)(rng)
    }

    /// An input value `p` with `(x, p) ∉ Xu`, preferring `preferred`.
    pub fn safe_input(&self, x: &[f64], preferred: &[f64]) -> Vec<f64> {
        let candidates = [
            preferred.to_vec(),
            self.system.jump_input_range.center(),
            self.system.flow_input_range.center(),
        ];
        candidates
            .into_iter()
            .find(|p| !self.is_unsafe(x, p))
            .unwrap_or_else(|| preferred.to_vec())
    }
}
