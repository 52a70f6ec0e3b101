//! HyRRT: a rapidly-exploring random tree over hybrid time, plus a
//! breadth-first forward propagation baseline.

mod bfs;
mod tree;

use std::time::{Duration, Instant};

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bfs::{forward_propagation_bfs, BfsConfig, BfsResult};
pub use tree::{Edge, SearchTree, Vertex, ENDPOINT_TOL};

use crate::error::{Error, Result};
use crate::library::InputLibrary;
use crate::problem::MotionPlanningProblem;
use crate::signal::SolutionPair;
use crate::simulator::{
    continuous_simulator, discrete_simulator, IntegratorConfig, PriorityRule, ZeroCrossingConfig,
};
use crate::system::{StateSampler, MEMBERSHIP_TOL};
use crate::validate::check_motion_plan;
use crate::Rng;

/// Membership test for the region a random state was drawn from.
type Region<'a> = dyn Fn(&[f64]) -> bool + 'a;

/// Cap on input redraws when `(x, u)` misses the flow or jump set.
pub const INPUT_RETRIES: usize = 32;
/// Flows shorter than this many integrator steps count as trivial.
pub const TRIVIAL_FLOW_STEPS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub p_n: f64,
    pub p_d: f64,
    pub max_iterations: usize,
    pub goal_tolerance: f64,
    pub rule: PriorityRule,
    pub n_init_samples: usize,
    pub constraint_inflation_s: f64,
    pub integrator: IntegratorConfig,
    pub zero_crossing: ZeroCrossingConfig,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            p_n: 0.5,
            p_d: 0.5,
            max_iterations: 1000,
            goal_tolerance: 0.2,
            rule: PriorityRule::FlowPriority,
            n_init_samples: 1,
            constraint_inflation_s: 0.0,
            integrator: IntegratorConfig::default(),
            zero_crossing: ZeroCrossingConfig::default(),
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.p_n) {
            return Err(Error::param("p_n", format!("must lie in (0, 1), got {}", self.p_n)));
        }
        if !open_unit(self.p_d) {
            return Err(Error::param("p_d", format!("must lie in (0, 1), got {}", self.p_d)));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        if !(self.goal_tolerance > 0.0) {
            return Err(Error::param(
                "goal_tolerance",
                format!("must be positive, got {}", self.goal_tolerance),
            ));
        }
        if self.n_init_samples == 0 {
            return Err(Error::param("n_init_samples", "must be at least 1"));
        }
        if !(self.constraint_inflation_s >= 0.0) {
            return Err(Error::param("constraint_inflation_s", "must be nonnegative"));
        }
        self.integrator.validate()?;
        self.zero_crossing.validate(&self.integrator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    PlanFound,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannerStats {
    pub iterations: usize,
    pub vertices: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct PlannerResult {
    pub outcome: Outcome,
    pub plan: Option<SolutionPair>,
    pub tree: SearchTree,
    pub stats: PlannerStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendResult {
    Advanced(usize),
    Trapped,
}

#[derive(Debug, Clone)]
pub struct NewState {
    pub generated: bool,
    pub x_new: Vec<f64>,
    pub pair: Option<SolutionPair>,
}

impl NewState {
    fn failed(x: &[f64]) -> Self {
        Self {
            generated: false,
            x_new: x.to_vec(),
            pair: None,
        }
    }
}

/// Roots drawn from `X0`.
pub fn init_tree(problem: &MotionPlanningProblem, n_samples: usize, rng: &mut Rng) -> Result<SearchTree> {
    if n_samples == 0 {
        return Err(Error::param("n_init_samples", "must be at least 1"));
    }
    let mut tree = SearchTree::new();
    for _ in 0..n_samples {
        let x = problem.sample_initial(rng);
        if x.len() != problem.system.state_dim || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("x0_sampler", "returned an invalid state"));
        }
        tree.add_root(x);
    }
    Ok(tree)
}

pub fn random_state(sampler: &StateSampler, rng: &mut Rng) -> Vec<f64> {
    sampler(rng)
}

pub fn nearest_neighbor(
    x_rand: &[f64],
    tree: &SearchTree,
    constraint: &Region<'_>,
) -> Option<usize> {
    tree.nearest(x_rand, constraint)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Flow,
    Jump,
}

/// Draws an input and propagates from vertex `v`: a flow from `C'`, a jump
/// from `D'`, and a `p_d`-weighted coin flip where both apply. Trivial pairs
/// and pairs touching `Xu` are discarded.
pub fn new_state(
    v: usize,
    tree: &SearchTree,
    library: &InputLibrary,
    problem: &MotionPlanningProblem,
    config: &PlannerConfig,
    rng: &mut Rng,
) -> NewState {
    let system = &problem.system;
    let x = tree.state(v);
    let in_c = system.in_flow_projection(x);
    let in_d = system.in_jump_projection(x);
    let branch = match (in_c, in_d) {
        (true, true) => {
            let r: f64 = rng.random();
            if r <= config.p_d {
                Branch::Flow
            } else {
                Branch::Jump
            }
        }
        (true, false) => Branch::Flow,
        (false, true) => Branch::Jump,
        (false, false) => return NewState::failed(x),
    };
    let pair = match branch {
        Branch::Flow => flow_from(x, library, problem, config, rng),
        Branch::Jump => jump_from(x, library, problem, rng),
    };
    let Some(pair) = pair else {
        return NewState::failed(x);
    };
    if pair.iter_samples().any(|(_, x, u)| problem.is_unsafe(x, u)) {
        return NewState::failed(x);
    }
    NewState {
        generated: true,
        x_new: pair.final_state().to_vec(),
        pair: Some(pair),
    }
}

fn flow_from(
    x: &[f64],
    library: &InputLibrary,
    problem: &MotionPlanningProblem,
    config: &PlannerConfig,
    rng: &mut Rng,
) -> Option<SolutionPair> {
    let system = &problem.system;
    let signal = (0..INPUT_RETRIES)
        .map(|_| library.sample_flow_signal(rng))
        .find(|s| system.flow_membership(x, &s.value))?;
    let pair = continuous_simulator(
        system,
        config.rule,
        x,
        &signal,
        &config.integrator,
        &config.zero_crossing,
    )
    .ok()?;
    // Capped so that a coarse step cannot make every library signal trivial.
    let threshold = (TRIVIAL_FLOW_STEPS * config.integrator.step).min(library.t_max() / TRIVIAL_FLOW_STEPS);
    (pair.max_point().ok()?.t >= threshold).then_some(pair)
}

fn jump_from(
    x: &[f64],
    library: &InputLibrary,
    problem: &MotionPlanningProblem,
    rng: &mut Rng,
) -> Option<SolutionPair> {
    let system = &problem.system;
    let u = (0..INPUT_RETRIES)
        .map(|_| library.sample_jump_value(rng))
        .find(|u| system.jump_membership(x, u))?;
    discrete_simulator(system, x, &u, Some(problem)).ok()
}

/// One tree extension toward `x_rand` from its nearest constrained vertex.
pub fn extend(
    tree: &mut SearchTree,
    x_rand: &[f64],
    library: &InputLibrary,
    problem: &MotionPlanningProblem,
    config: &PlannerConfig,
    constraint: &Region<'_>,
    rng: &mut Rng,
) -> ExtendResult {
    let Some(v) = nearest_neighbor(x_rand, tree, constraint) else {
        return ExtendResult::Trapped;
    };
    let ns = new_state(v, tree, library, problem, config, rng);
    match ns.pair {
        Some(pair) if ns.generated => ExtendResult::Advanced(tree.add_child(v, pair)),
        _ => ExtendResult::Trapped,
    }
}

/// Concatenated solution pair along the root path to `id`, or `None` if two
/// consecutive flow edges break the requirement that the later one starts
/// in `C`.
pub fn path_plan(tree: &SearchTree, problem: &MotionPlanningProblem, id: usize) -> Option<SolutionPair> {
    let path = tree.path_to(id);
    let edges = tree.edges();
    for w in path.windows(2) {
        let (a, b) = (&edges[w[0]].pair, &edges[w[1]].pair);
        if a.is_purely_continuous()
            && b.is_purely_continuous()
            && !problem.system.flow_membership(b.initial_state(), b.initial_input())
        {
            return None;
        }
    }
    let Some((&first, rest)) = path.split_first() else {
        let x = tree.state(id).to_vec();
        let u = problem.safe_input(&x, &problem.system.flow_input_range.center());
        return Some(SolutionPair::point(x, u));
    };
    let mut plan = edges[first].pair.clone();
    for &e in rest {
        plan = plan.concatenate(&edges[e].pair).ok()?;
    }
    Some(plan)
}

fn plan_at(tree: &SearchTree, problem: &MotionPlanningProblem, id: usize, eps: f64) -> Option<SolutionPair> {
    if !(problem.goal_distance(tree.state(id)) <= eps) {
        return None;
    }
    let plan = path_plan(tree, problem, id)?;
    check_motion_plan(problem, &plan, eps).valid.then_some(plan)
}

/// First vertex (by id) within `eps` of `Xf` whose root path yields a
/// certified motion plan.
pub fn check_for_motion_plan(
    tree: &SearchTree,
    problem: &MotionPlanningProblem,
    eps: f64,
) -> Option<SolutionPair> {
    (0..tree.vertex_count()).find_map(|id| plan_at(tree, problem, id, eps))
}

/// Runs HyRRT with the seed in `config`.
pub fn hyrrt(
    problem: &MotionPlanningProblem,
    library: &InputLibrary,
    config: &PlannerConfig,
) -> Result<PlannerResult> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tree = init_tree(problem, config.n_init_samples, &mut rng)?;
    let finish = |tree: SearchTree, plan: Option<SolutionPair>, iterations: usize| PlannerResult {
        outcome: if plan.is_some() {
            Outcome::PlanFound
        } else {
            Outcome::BudgetExhausted
        },
        plan,
        stats: PlannerStats {
            iterations,
            vertices: tree.vertex_count(),
            wall_time: start.elapsed(),
        },
        tree,
    };
    if let Some(plan) = check_for_motion_plan(&tree, problem, config.goal_tolerance) {
        return Ok(finish(tree, Some(plan), 0));
    }
    let system = &problem.system;
    let s = config.constraint_inflation_s + MEMBERSHIP_TOL;
    let in_xc = |x: &[f64]| (system.flow_projection_distance)(x) <= s;
    let in_xd = |x: &[f64]| (system.jump_projection_distance)(x) <= s;
    for k in 1..=config.max_iterations {
        let r: f64 = rng.random();
        let (x_rand, constraint): (Vec<f64>, &Region<'_>) = if r <= config.p_n {
            (system.sample_flow_state(&mut rng), &in_xc)
        } else {
            (system.sample_jump_state(&mut rng), &in_xd)
        };
        if let ExtendResult::Advanced(id) =
            extend(&mut tree, &x_rand, library, problem, config, constraint, &mut rng)
        {
            if let Some(plan) = plan_at(&tree, problem, id, config.goal_tolerance) {
                return Ok(finish(tree, Some(plan), k));
            }
        }
    }
    Ok(finish(tree, None, config.max_iterations))
}
