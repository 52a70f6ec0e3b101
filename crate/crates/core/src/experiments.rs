//! Seeded Monte Carlo batches of planner runs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::library::InputLibrary;
use crate::planner::{hyrrt, Outcome, PlannerConfig};
use crate::problem::MotionPlanningProblem;
use crate::signal::SolutionPair;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcome: Outcome,
    pub iterations: usize,
    pub vertices: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialBatchReport {
    pub n_runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub vertices_mean: f64,
    pub vertices_min: usize,
    pub vertices_max: usize,
    pub wall_ms_mean: f64,
    pub wall_ms_median: f64,
    pub records: Vec<TrialRecord>,
    /// Plans in seed order; `None` for runs that exhausted their budget.
    #[serde(skip)]
    pub plans: Vec<Option<SolutionPair>>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One independent HyRRT run per seed, executed in parallel.
pub fn run_trials(
    problem: &MotionPlanningProblem,
    library: &InputLibrary,
    config: &PlannerConfig,
    seeds: &[u64],
) -> Result<TrialBatchReport> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "at least one seed is required"));
    }
    config.validate()?;
    let runs: Vec<(TrialRecord, Option<SolutionPair>)> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = PlannerConfig {
                seed,
                ..config.clone()
            };
            let r = hyrrt(problem, library, &cfg)?;
            Ok((
                TrialRecord {
                    seed,
                    outcome: r.outcome,
                    iterations: r.stats.iterations,
                    vertices: r.stats.vertices,
                    wall_ms: r.stats.wall_time.as_secs_f64() * 1e3,
                },
                r.plan,
            ))
        })
        .collect::<Result<_>>()?;
    let (records, plans): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let n = records.len();
    let successes = records
        .iter()
        .filter(|r| r.outcome == Outcome::PlanFound)
        .count();
    let vertices: Vec<usize> = records.iter().map(|r| r.vertices).collect();
    let mut wall: Vec<f64> = records.iter().map(|r| r.wall_ms).collect();
    Ok(TrialBatchReport {
        n_runs: n,
        successes,
        success_rate: successes as f64 / n as f64,
        vertices_mean: vertices.iter().sum::<usize>() as f64 / n as f64,
        vertices_min: vertices.iter().copied().min().unwrap_or(0),
        vertices_max: vertices.iter().copied().max().unwrap_or(0),
        wall_ms_mean: wall.iter().sum::<f64>() / n as f64,
        wall_ms_median: median(&mut wall),
        records,
        plans,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub n_runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    #[serde(skip)]
    pub report: TrialBatchReport,
}

/// Success rate per iteration budget, using seeds `0..seeds_per_k` for every
/// budget.
pub fn convergence_sweep(
    problem: &MotionPlanningProblem,
    library: &InputLibrary,
    base: &PlannerConfig,
    k_values: &[usize],
    seeds_per_k: usize,
) -> Result<Vec<SweepPoint>> {
    if k_values.is_empty() {
        return Err(Error::param("k_values", "at least one budget is required"));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("k_values", "budgets must be strictly increasing"));
    }
    if seeds_per_k == 0 {
        return Err(Error::param("seeds_per_k", "must be at least 1"));
    }
    let seeds: Vec<u64> = (0..seeds_per_k as u64).collect();
    k_values
        .iter()
        .map(|&k| {
            let cfg = PlannerConfig {
                max_iterations: k,
                ..base.clone()
            };
            let report = run_trials(problem, library, &cfg, &seeds)?;
            Ok(SweepPoint {
                k,
                n_runs: report.n_runs,
                successes: report.successes,
                success_rate: report.success_rate,
                report,
            })
        })
        .collect()
}

/// Verdict on a sweep: whether each later success rate is at least the
/// previous one up to `z` binomial standard errors, and whether the last
/// budget beats the first outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrendVerdict {
    pub monotone_within_noise: bool,
    pub strict_improvement: bool,
}

pub fn trend(points: &[SweepPoint], z: f64) -> TrendVerdict {
    let se = |p: &SweepPoint| {
        let r = p.success_rate;
        (r * (1.0 - r) / p.n_runs.max(1) as f64).sqrt()
    };
    let monotone_within_noise = points.windows(2).all(|w| {
        let noise = z * (se(&w[0]).powi(2) + se(&w[1]).powi(2)).sqrt();
        w[1].success_rate + noise >= w[0].success_rate
    });
    let strict_improvement = match (points.first(), points.last()) {
        (Some(a), Some(b)) => points.len() > 1 && b.success_rate > a.success_rate,
        _ => false,
    };
    TrendVerdict {
        monotone_within_noise,
        strict_improvement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_checks() {
        let p = MotionPlanningProblem::bouncing_ball();
        let lib = InputLibrary::bouncing_ball();
        let cfg = PlannerConfig::default();
        assert!(run_trials(&p, &lib, &cfg, &[]).is_err());
        assert!(convergence_sweep(&p, &lib, &cfg, &[200, 50], 2).is_err());
        assert!(convergence_sweep(&p, &lib, &cfg, &[], 2).is_err());
    }

    #[test]
    fn single_budget_sweep() {
        let p = MotionPlanningProblem::bouncing_ball();
        let lib = InputLibrary::bouncing_ball();
        let cfg = PlannerConfig::default();
        let s = convergence_sweep(&p, &lib, &cfg, &[5], 3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n_runs, 3);
    }

    #[test]
    fn starved_budget_fails() {
        let p = MotionPlanningProblem::bouncing_ball();
        let lib = InputLibrary::bouncing_ball();
        let cfg = PlannerConfig {
            max_iterations: 1,
            ..PlannerConfig::default()
        };
        let r = run_trials(&p, &lib, &cfg, &[0, 1, 2, 3]).unwrap();
        assert_eq!(r.successes, 0);
        assert_eq!(r.success_rate, 0.0);
        let again = run_trials(&p, &lib, &cfg, &[0, 1, 2, 3]).unwrap();
        let strip = |r: &TrialBatchReport| {
            r.records
                .iter()
                .map(|t| (t.seed, t.outcome, t.iterations, t.vertices))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&r), strip(&again));
    }
}
