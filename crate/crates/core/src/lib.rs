//! Motion planning for hybrid dynamical systems `H = (C, f, D, g)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`time`] and [`signal`]: hybrid time domains, sampled hybrid signals,
//!   solution pairs, and the concatenation / truncation / reversal /
//!   closeness operations on them.
//! - [`system`]: system definitions, the built-in actuated bouncing ball,
//!   δ-inflation and backward-in-time constructions.
//! - [`problem`] and [`validate`]: motion planning problems and the checkers
//!   that certify solution pairs and plans.
//! - [`simulator`]: fixed-step integration with zero-crossing detection, and
//!   single-jump simulation.
//! - [`library`]: the input library sampled by the planner.
//! - [`planner`]: the HyRRT search and a breadth-first forward propagation
//!   baseline.
//! - [`experiments`]: seeded Monte Carlo batches and convergence sweeps.

// `!(x > 0.0)` is how parameter checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod library;
pub mod planner;
pub mod problem;
pub mod signal;
pub mod simulator;
pub mod system;
pub mod time;
pub mod validate;

pub use error::{Error, Result};
pub use experiments::{
    convergence_sweep, run_trials, trend, SweepPoint, TrialBatchReport, TrialRecord, TrendVerdict,
};
pub use library::{InputBox, InputLibrary};
pub use planner::{
    forward_propagation_bfs, hyrrt, BfsConfig, BfsResult, Outcome, PlannerConfig, PlannerResult, SearchTree,
};
pub use problem::MotionPlanningProblem;
pub use signal::{HybridArc, HybridInput, HybridSignal, Sample, SolutionPair};
pub use simulator::{
    ConstantInputSignal, IntegratorConfig, PriorityRule, Scheme, ZeroCrossingConfig,
};
pub use system::SystemDefinition;
pub use time::{HybridTime, HybridTimeDomain, Interval};
pub use validate::{Condition, ValidationReport, Violation};

/// Random stream handle accepted by every sampler.
pub type Rng = dyn rand::RngCore;
