//! Fixtures shared by the criterion benches.

use hyrrt_core::planner::SearchTree;
use hyrrt_core::{MotionPlanningProblem, PlannerConfig};

/// Planner settings used by the end-to-end benches.
pub fn bench_config(seed: u64) -> PlannerConfig {
    PlannerConfig {
        seed,
        ..PlannerConfig::default()
    }
}

/// A tree of `n` root vertices on a deterministic grid over the sampled
/// region of the bouncing ball's flow set.
pub fn grid_tree(n: usize) -> SearchTree {
    let mut tree = SearchTree::new();
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    for k in 0..n {
        let (i, j) = (k % side, k / side);
        tree.add_root(vec![
            20.0 * i as f64 / side as f64,
            -20.0 + 40.0 * j as f64 / side as f64,
        ]);
    }
    tree
}

pub fn problem() -> MotionPlanningProblem {
    MotionPlanningProblem::bouncing_ball()
}
