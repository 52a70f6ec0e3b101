use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{new_state, path_plan, PlannerConfig, SearchTree};
use crate::error::{Error, Result};
use crate::library::InputLibrary;
use crate::problem::MotionPlanningProblem;
use crate::signal::SolutionPair;
use crate::validate::check_motion_plan;
use crate::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfsConfig {
    pub depth_budget: usize,
    pub branch_budget: usize,
    pub goal_tolerance: f64,
    /// Frontier states kept per layer; defaults to `branch_budget²`.
    pub frontier_cap: Option<usize>,
    /// Frontier states closer than this (per coordinate) are merged.
    pub merge_resolution: f64,
}

impl Default for BfsConfig {
    fn default() -> Self {
        Self {
            depth_budget: 40,
            branch_budget: 8,
            goal_tolerance: 0.2,
            frontier_cap: None,
            merge_resolution: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfsResult {
    pub plan: Option<SolutionPair>,
    pub tree: SearchTree,
    pub layers: usize,
    pub wall_time: Duration,
}

/// Budgeted breadth-first under-approximation of forward propagation: every
/// frontier state is extended `branch_budget` times with random library
/// inputs, layer by layer, until a certified plan appears or
/// `depth_budget` layers are spent. Each layer's frontier is thinned by
/// merging nearby states and then subsampling to the cap.
pub fn forward_propagation_bfs(
    problem: &MotionPlanningProblem,
    library: &InputLibrary,
    settings: &PlannerConfig,
    bfs: &BfsConfig,
    rng: &mut Rng,
) -> Result<BfsResult> {
    if bfs.branch_budget == 0 {
        return Err(Error::param("branch_budget", "must be at least 1"));
    }
    if !(bfs.goal_tolerance > 0.0) {
        return Err(Error::param("goal_tolerance", "must be positive"));
    }
    if !(bfs.merge_resolution > 0.0) {
        return Err(Error::param("merge_resolution", "must be positive"));
    }
    let start = Instant::now();
    let cap = bfs
        .frontier_cap
        .unwrap_or(bfs.branch_budget * bfs.branch_budget)
        .max(1);
    let mut tree = super::init_tree(problem, settings.n_init_samples, rng)?;
    let found = |tree: &SearchTree, id: usize| -> Option<SolutionPair> {
        if !(problem.goal_distance(tree.state(id)) <= bfs.goal_tolerance) {
            return None;
        }
        let plan = path_plan(tree, problem, id)?;
        check_motion_plan(problem, &plan, bfs.goal_tolerance)
            .valid
            .then_some(plan)
    };
    let done = |tree: SearchTree, plan: Option<SolutionPair>, layers: usize| BfsResult {
        plan,
        tree,
        layers,
        wall_time: start.elapsed(),
    };
    let mut frontier: Vec<usize> = (0..tree.vertex_count()).collect();
    if let Some(plan) = frontier.iter().find_map(|&id| found(&tree, id)) {
        return Ok(done(tree, Some(plan), 0));
    }
    for layer in 1..=bfs.depth_budget {
        let mut next = Vec::new();
        for &v in &frontier {
            for _ in 0..bfs.branch_budget {
                let ns = new_state(v, &tree, library, problem, settings, rng);
                let Some(pair) = ns.pair.filter(|_| ns.generated) else {
                    continue;
                };
                let id = tree.add_child(v, pair);
                if let Some(plan) = found(&tree, id) {
                    return Ok(done(tree, Some(plan), layer));
                }
                next.push(id);
            }
        }
        frontier = thin(&tree, next, bfs.merge_resolution, cap, rng);
        if frontier.is_empty() {
            return Ok(done(tree, None, layer));
        }
    }
    Ok(done(tree, None, bfs.depth_budget))
}

fn thin(tree: &SearchTree, ids: Vec<usize>, resolution: f64, cap: usize, rng: &mut Rng) -> Vec<usize> {
    let mut seen = HashSet::new();
    let merged: Vec<usize> = ids
        .into_iter()
        .filter(|&id| {
            let cell: Vec<i64> = tree
                .state(id)
                .iter()
                .map(|v| (v / resolution).floor() as i64)
                .collect();
            seen.insert(cell)
        })
        .collect();
    if merged.len() <= cap {
        return merged;
    }
    let mut keep: Vec<usize> = index::sample(rng, merged.len(), cap).into_vec();
    keep.sort_unstable();
    keep.into_iter().map(|k| merged[k]).collect()
}
