use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bundled_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/bouncing_ball.toml")
}

fn hyrrt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyrrt"))
        .current_dir(dir)
        .env_remove("HYRRT_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, planner: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("version = 1\n\n[planner]\n{planner}\n")).unwrap();
    path
}

/// Runs the bundled config and returns the plan path.
fn bundled_plan(dir: &Path) -> PathBuf {
    let cfg = bundled_config();
    let out = dir.join("plan.json");
    let o = hyrrt(dir, &["plan", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    out
}

/// A single flow segment from (15, 0); `end` overrides the last state.
fn flow_only_plan(dir: &Path, end: Option<[f64; 2]>) -> PathBuf {
    let g = 9.81;
    let mut samples = Vec::new();
    for k in 0..=10 {
        let t = k as f64 * 0.01;
        let mut x = [15.0 - 0.5 * g * t * t, -g * t];
        if k == 10 {
            x = end.unwrap_or(x);
        }
        samples.push(serde_json::json!({ "t": t, "x": x, "u": [1.0] }));
    }
    let plan = serde_json::json!({
        "version": 1,
        "system": "bouncing-ball",
        "domain": [{ "j": 0, "t_start": 0.0, "t_end": 0.1 }],
        "flow_segments": [{ "j": 0, "samples": samples }],
        "jumps": [],
        "metadata": { "seed": 0, "iterations": 0, "vertices": 1, "wall_ms": 0.0 }
    });
    let path = dir.join("flow.json");
    fs::write(&path, serde_json::to_string_pretty(&plan).unwrap()).unwrap();
    path
}

#[test]
fn bundled_plan_validates_and_reports_clearance() {
    let dir = TempDir::new().unwrap();
    let plan = bundled_plan(dir.path());
    let cfg = bundled_config();
    let o = hyrrt(dir.path(), &["validate", plan.to_str().unwrap(), cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("valid"));

    // the goal is a single point on the boundary, so no plan has positive clearance
    let o = hyrrt(
        dir.path(),
        &["validate", plan.to_str().unwrap(), cfg.to_str().unwrap(), "--delta", "0.1"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("clearance 0.1: false"), "{}", stdout(&o));
}

#[test]
fn plan_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let pa = fs::read_to_string(bundled_plan(a.path())).unwrap();
    let pb = fs::read_to_string(bundled_plan(b.path())).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("wall_ms")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&pa), strip(&pb));
}

#[test]
fn exhausted_budget_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = 1\nseed = 3");
    let o = hyrrt(dir.path(), &["plan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("outcome=budget-exhausted"));
    assert!(!dir.path().join("plan.json").exists());
}

#[test]
fn malformed_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = \"many\"");
    let o = hyrrt(dir.path(), &["plan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("planner.max_iterations"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "[planner.integrator]\nstep = -1.0");
    let o = hyrrt(dir.path(), &["plan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("planner.integrator.step"), "{}", stderr(&o));
}

#[test]
fn missing_config_and_bad_arguments_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(hyrrt(dir.path(), &["plan"]).status.code(), Some(2));
    assert_eq!(hyrrt(dir.path(), &["plan", "nope.toml"]).status.code(), Some(2));
    assert_eq!(hyrrt(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = 1");
    let o = Command::new(env!("CARGO_BIN_EXE_hyrrt"))
        .current_dir(dir.path())
        .env("HYRRT_CONFIG", &cfg)
        .arg("plan")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn wrong_final_state_is_rejected() {
    let dir = TempDir::new().unwrap();
    let plan = flow_only_plan(dir.path(), Some([12.0, 0.0]));
    let cfg = bundled_config();
    let o = hyrrt(dir.path(), &["validate", plan.to_str().unwrap(), cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("final-state distance 2.0 > 0.2"), "{}", stdout(&o));
}

#[test]
fn inconsistent_plan_file_exits_two() {
    let dir = TempDir::new().unwrap();
    let plan = flow_only_plan(dir.path(), None);
    let text = fs::read_to_string(&plan).unwrap().replace("\"t_end\": 0.1", "\"t_end\": 0.5");
    fs::write(&plan, text).unwrap();
    let o = hyrrt(dir.path(), &["plot-data", plan.to_str().unwrap(), "out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed plan file"), "{}", stderr(&o));
}

fn rows(path: &Path) -> Vec<(f64, usize)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["t", "j", "x_1", "x_2", "u_1"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn plot_data_repeats_time_across_a_jump() {
    let dir = TempDir::new().unwrap();
    let plan = bundled_plan(dir.path());
    let out = dir.path().join("plot.csv");
    let o = hyrrt(dir.path(), &["plot-data", plan.to_str().unwrap(), out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&out);
    let jumps: Vec<_> = rows.windows(2).filter(|w| w[1].1 == w[0].1 + 1).collect();
    assert!(!jumps.is_empty());
    for w in &jumps {
        assert_eq!(w[0].0, w[1].0);
    }
    for w in rows.windows(2).filter(|w| w[1].1 == w[0].1) {
        assert!(w[1].0 > w[0].0);
    }

    let again = dir.path().join("again.csv");
    hyrrt(dir.path(), &["plot-data", plan.to_str().unwrap(), again.to_str().unwrap()]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn plot_data_for_a_flow_only_plan() {
    let dir = TempDir::new().unwrap();
    let plan = flow_only_plan(dir.path(), None);
    let out = dir.path().join("plot.csv");
    let o = hyrrt(dir.path(), &["plot-data", plan.to_str().unwrap(), out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = rows(&out);
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 == 0));
}

#[test]
fn montecarlo_writes_report_and_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = 50");
    let o = hyrrt(
        dir.path(),
        &["montecarlo", cfg.to_str().unwrap(), "--runs", "3", "--report", "r.json", "--csv", "r.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["n_runs"], 3);
    assert!(report["success_rate"].is_number());
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("seed,outcome,iterations,vertices,wall_ms"));
}

#[test]
fn montecarlo_sweep() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = 50");
    let o = hyrrt(
        dir.path(),
        &["montecarlo", cfg.to_str().unwrap(), "--runs", "2", "--sweep", "10,40"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "k,n_runs,successes,success_rate");
    assert!(lines[1].starts_with("10,2,") && lines[2].starts_with("40,2,"));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"trend\""));
}

#[test]
fn montecarlo_needs_a_positive_run_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "max_iterations = 10");
    let o = hyrrt(dir.path(), &["montecarlo", cfg.to_str().unwrap(), "--runs", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hyrrt(dir.path(), &["montecarlo", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
