//! Run configuration file (TOML, schema version 1).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hyrrt_core::system::inflate;
use hyrrt_core::{Error, InputBox, InputLibrary, MotionPlanningProblem, PlannerConfig};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;
/// Consulted when no config path is given on the command line.
pub const CONFIG_ENV: &str = "HYRRT_CONFIG";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default = "default_problem")]
    pub problem: String,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub library: LibrarySection,
    #[serde(default)]
    pub inflation_delta: Option<f64>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_problem() -> String {
    "bouncing-ball".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LibrarySection {
    pub t_max: f64,
    pub flow_input_min: Vec<f64>,
    pub flow_input_max: Vec<f64>,
    pub jump_input_min: Vec<f64>,
    pub jump_input_max: Vec<f64>,
}

impl Default for LibrarySection {
    fn default() -> Self {
        let lib = InputLibrary::bouncing_ball();
        Self {
            t_max: lib.t_max(),
            flow_input_min: lib.flow_box().min.clone(),
            flow_input_max: lib.flow_box().max.clone(),
            jump_input_min: lib.jump_box().min.clone(),
            jump_input_max: lib.jump_box().max.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub plan: PathBuf,
    pub report: PathBuf,
    pub csv: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            plan: "plan.json".into(),
            report: "report.json".into(),
            csv: "report.csv".into(),
        }
    }
}

/// A parsed and range-checked configuration with its problem and library
/// already built.
pub struct Resolved {
    pub config: RunConfig,
    pub problem: MotionPlanningProblem,
    pub library: InputLibrary,
}

/// The explicit path, else the path named by [`CONFIG_ENV`].
pub fn config_path(explicit: Option<PathBuf>) -> Result<PathBuf> {
    explicit
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
        .ok_or_else(|| anyhow!("no config given and {CONFIG_ENV} is not set"))
}

pub fn load(path: &Path) -> Result<Resolved> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse(text: &str) -> Result<Resolved> {
    let de = toml::Deserializer::parse(text).map_err(|e| anyhow!("{e}"))?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().to_string();
        if path == "." {
            anyhow!(message)
        } else {
            anyhow!("{path}: {message}")
        }
    })?;
    resolve(config)
}

fn resolve(config: RunConfig) -> Result<Resolved> {
    if config.version != CONFIG_VERSION {
        bail!(
            "version: unsupported schema version {}, expected {CONFIG_VERSION}",
            config.version
        );
    }
    let mut problem = MotionPlanningProblem::by_name(&config.problem)
        .map_err(|e| anyhow!("problem: {e}"))?;
    config.planner.validate().map_err(|e| field_error("planner", e))?;
    if let Some(delta) = config.inflation_delta {
        let system = inflate(&problem.system, delta).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => anyhow!("inflation_delta: {reason}"),
            other => anyhow!("inflation_delta: {other}"),
        })?;
        problem = problem.with_system(system);
    }
    let lib = &config.library;
    let input_dim = problem.system.input_dim;
    for (name, v) in [
        ("flow_input_min", &lib.flow_input_min),
        ("flow_input_max", &lib.flow_input_max),
        ("jump_input_min", &lib.jump_input_min),
        ("jump_input_max", &lib.jump_input_max),
    ] {
        if v.len() != input_dim {
            bail!("library.{name}: expected {input_dim} entries, got {}", v.len());
        }
    }
    let flow_box = InputBox::new(lib.flow_input_min.clone(), lib.flow_input_max.clone())
        .map_err(|e| field_error("library.flow_input", e))?;
    let jump_box = InputBox::new(lib.jump_input_min.clone(), lib.jump_input_max.clone())
        .map_err(|e| field_error("library.jump_input", e))?;
    let library =
        InputLibrary::new(lib.t_max, flow_box, jump_box).map_err(|e| field_error("library", e))?;
    Ok(Resolved {
        config,
        problem,
        library,
    })
}

/// Prefixes a core parameter error with the config path of the field.
fn field_error(section: &str, e: Error) -> anyhow::Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let path = match (section, name) {
                ("planner", "step") => "planner.integrator.step".to_string(),
                ("planner", "time_tolerance" | "max_bisections") => {
                    format!("planner.zero_crossing.{name}")
                }
                (_, "box") => section.to_string(),
                _ => format!("{section}.{name}"),
            };
            anyhow!("{path}: {reason}")
        }
        other => anyhow!("{section}: {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> String {
        format!("{:#}", parse(text).err().expect("config should be rejected"))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let r = parse("version = 1").unwrap();
        assert_eq!(r.config.planner, PlannerConfig::default());
        assert_eq!(r.library, InputLibrary::bouncing_ball());
        assert_eq!(r.problem.name, "bouncing-ball");
    }

    #[test]
    fn field_paths_in_errors() {
        assert!(err("version = 2").starts_with("version:"));
        assert!(err("version = 1\n[planner]\np_n = 1.5").starts_with("planner.p_n:"));
        assert!(err("version = 1\n[planner]\np_n = \"x\"").starts_with("planner.p_n:"));
        let unknown = err("version = 1\n[planner]\npn = 0.5");
        assert!(unknown.starts_with("planner.pn:"), "{unknown}");
        assert!(err("version = 1\n[planner.integrator]\nstep = -1.0")
            .starts_with("planner.integrator.step:"));
        assert!(err("version = 1\n[library]\nt_max = 0.0").starts_with("library.t_max:"));
        assert!(err("version = 1\n[library]\nflow_input_min = [6.0]")
            .starts_with("library.flow_input:"));
        assert!(err("version = 1\ninflation_delta = -1.0").starts_with("inflation_delta:"));
        assert!(err("version = 1\nproblem = \"pendulum\"").starts_with("problem:"));
        assert!(err("[planner]").contains("`version`"));
    }

    #[test]
    fn inflation_changes_the_system() {
        let r = parse("version = 1\ninflation_delta = 0.1").unwrap();
        assert!(r.problem.system.name.contains("inflate"));
    }
}
