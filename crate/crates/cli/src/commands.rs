use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use hyrrt_core::system::inflate;
use hyrrt_core::validate::{check_clearance, check_motion_plan};
use hyrrt_core::{convergence_sweep, hyrrt, run_trials, trend, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config;
use crate::plan_file::{create_parent, Metadata, MotionPlanFile};

pub const EXIT_FAILURE: u8 = 1;

pub fn plan(config_path: Option<PathBuf>, out: Option<PathBuf>) -> Result<ExitCode> {
    let path = config::config_path(config_path)?;
    let resolved = config::load(&path)?;
    let cfg = &resolved.config;
    let result = hyrrt(&resolved.problem, &resolved.library, &cfg.planner)?;
    let wall_ms = result.stats.wall_time.as_secs_f64() * 1e3;
    println!(
        "outcome={} iterations={} vertices={} wall_ms={wall_ms:.3}",
        outcome_name(result.outcome),
        result.stats.iterations,
        result.stats.vertices,
    );
    let Some(pair) = result.plan else {
        return Ok(ExitCode::from(EXIT_FAILURE));
    };
    let file = MotionPlanFile::from_pair(
        &pair,
        &resolved.problem.system.name,
        Metadata {
            seed: cfg.planner.seed,
            iterations: result.stats.iterations,
            vertices: result.stats.vertices,
            wall_ms,
        },
    );
    let out = out.unwrap_or_else(|| cfg.output.plan.clone());
    file.write(&out)?;
    println!("plan written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

pub struct ValidateArgs {
    pub plan: PathBuf,
    pub config: Option<PathBuf>,
    pub delta: Option<f64>,
    pub samples: usize,
    pub inflate: bool,
}

pub fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let file = MotionPlanFile::read(&args.plan)?;
    let pair = file.to_pair().with_context(|| format!("malformed plan file {}", args.plan.display()))?;
    let resolved = config::load(&config::config_path(args.config)?)?;
    let mut problem = resolved.problem;
    if args.inflate {
        let Some(delta) = args.delta else {
            bail!("--inflate needs --delta");
        };
        problem = problem.with_system(inflate(&problem.system, delta)?);
    }
    let report = check_motion_plan(&problem, &pair, resolved.config.planner.goal_tolerance);
    println!("{}", report.to_string().trim_end());
    if let Some(delta) = args.delta {
        let mut rng = ChaCha8Rng::seed_from_u64(resolved.config.planner.seed);
        let clear = check_clearance(&problem, &pair, delta, args.samples, &mut rng)?;
        println!("clearance {delta}: {clear}");
    }
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    })
}

pub struct MonteCarloArgs {
    pub config: Option<PathBuf>,
    pub runs: Option<usize>,
    pub seeds: Option<PathBuf>,
    pub sweep: Option<Vec<usize>>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub fn montecarlo(args: MonteCarloArgs) -> Result<ExitCode> {
    let resolved = config::load(&config::config_path(args.config)?)?;
    let cfg = &resolved.config;
    let seeds: Vec<u64> = match (args.runs, &args.seeds) {
        (Some(0), _) => bail!("--runs: must be at least 1"),
        (Some(n), None) => (0..n as u64).map(|k| cfg.planner.seed + k).collect(),
        (None, Some(path)) => read_seeds(path)?,
        _ => bail!("exactly one of --runs and --seeds is required"),
    };
    let report_path = args.report.unwrap_or_else(|| cfg.output.report.clone());
    let csv_path = args.csv.unwrap_or_else(|| cfg.output.csv.clone());
    if let Some(ks) = args.sweep {
        let points = convergence_sweep(
            &resolved.problem,
            &resolved.library,
            &cfg.planner,
            &ks,
            seeds.len(),
        )?;
        let verdict = trend(&points, 2.0);
        println!("k,n_runs,successes,success_rate");
        for p in &points {
            println!("{},{},{},{}", p.k, p.n_runs, p.successes, p.success_rate);
        }
        println!(
            "monotone within 2 sigma: {}, last beats first: {}",
            verdict.monotone_within_noise, verdict.strict_improvement
        );
        write_json(&report_path, &serde_json::json!({ "points": points, "trend": verdict }))?;
        let mut w = csv_writer(&csv_path)?;
        w.write_record(["k", "n_runs", "successes", "success_rate"])?;
        for p in &points {
            w.serialize((p.k, p.n_runs, p.successes, p.success_rate))?;
        }
        w.flush()?;
    } else {
        let report = run_trials(&resolved.problem, &resolved.library, &cfg.planner, &seeds)?;
        println!(
            "runs={} successes={} success_rate={} vertices_mean={:.1} wall_ms_median={:.3}",
            report.n_runs,
            report.successes,
            report.success_rate,
            report.vertices_mean,
            report.wall_ms_median
        );
        write_json(&report_path, &report)?;
        let mut w = csv_writer(&csv_path)?;
        w.write_record(["seed", "outcome", "iterations", "vertices", "wall_ms"])?;
        for r in &report.records {
            w.serialize((r.seed, outcome_name(r.outcome), r.iterations, r.vertices, r.wall_ms))?;
        }
        w.flush()?;
    }
    println!("report written to {} and {}", report_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

/// Seeds separated by whitespace or commas; `#` starts a comment.
fn read_seeds(path: &Path) -> Result<Vec<u64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read seeds {}", path.display()))?;
    let seeds = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().with_context(|| format!("{}: bad seed `{s}`", path.display())))
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        bail!("{}: no seeds", path.display());
    }
    Ok(seeds)
}

pub fn plot_data(plan: &Path, out: &Path) -> Result<ExitCode> {
    let file = MotionPlanFile::read(plan)?;
    let pair = file.to_pair().with_context(|| format!("malformed plan file {}", plan.display()))?;
    let mut w = csv_writer(out)?;
    let mut header = vec!["t".to_string(), "j".to_string()];
    header.extend((1..=pair.state_dim()).map(|i| format!("x_{i}")));
    header.extend((1..=pair.input_dim()).map(|i| format!("u_{i}")));
    w.write_record(&header)?;
    for (time, x, u) in pair.iter_samples() {
        let mut row = vec![time.t.to_string(), time.j.to_string()];
        row.extend(x.iter().map(f64::to_string));
        row.extend(u.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::PlanFound => "plan-found",
        Outcome::BudgetExhausted => "budget-exhausted",
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}
