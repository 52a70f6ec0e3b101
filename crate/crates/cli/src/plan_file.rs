//! JSON motion plan file.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hyrrt_core::time::is_hybrid_time_domain;
use hyrrt_core::{HybridSignal, Interval, Sample, SolutionPair};
use serde::{Deserialize, Serialize};

pub const PLAN_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionPlanFile {
    pub version: u32,
    pub system: String,
    pub domain: Vec<Interval>,
    /// One entry per interval of the domain, including single-point ones.
    pub flow_segments: Vec<FlowSegment>,
    pub jumps: Vec<JumpRecord>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSegment {
    pub j: usize,
    pub samples: Vec<PlanSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpRecord {
    pub t: f64,
    /// Interval the jump leaves.
    pub j: usize,
    pub x_before: Vec<f64>,
    pub x_after: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub seed: u64,
    pub iterations: usize,
    pub vertices: usize,
    pub wall_ms: f64,
}

impl MotionPlanFile {
    pub fn from_pair(pair: &SolutionPair, system: &str, metadata: Metadata) -> Self {
        let arc = pair.arc().segments();
        let input = pair.input().segments();
        let flow_segments: Vec<FlowSegment> = arc
            .iter()
            .zip(input)
            .enumerate()
            .map(|(j, (xs, us))| FlowSegment {
                j,
                samples: xs
                    .iter()
                    .zip(us)
                    .map(|(x, u)| PlanSample {
                        t: x.t,
                        x: x.value.clone(),
                        u: u.value.clone(),
                    })
                    .collect(),
            })
            .collect();
        let jumps = flow_segments
            .windows(2)
            .map(|w| {
                let before = w[0].samples.last().expect("nonempty segment");
                JumpRecord {
                    t: before.t,
                    j: w[0].j,
                    x_before: before.x.clone(),
                    x_after: w[1].samples[0].x.clone(),
                    u: before.u.clone(),
                }
            })
            .collect();
        Self {
            version: PLAN_VERSION,
            system: system.to_string(),
            domain: pair.domain().intervals().to_vec(),
            flow_segments,
            jumps,
            metadata,
        }
    }

    /// Rebuilds the solution pair after checking that the domain, segments
    /// and jump records agree with each other.
    pub fn to_pair(&self) -> Result<SolutionPair> {
        ensure!(
            self.version == PLAN_VERSION,
            "version: unsupported plan version {}, expected {PLAN_VERSION}",
            self.version
        );
        ensure!(is_hybrid_time_domain(&self.domain), "domain: not a hybrid time domain");
        ensure!(
            self.flow_segments.len() == self.domain.len(),
            "flow_segments: {} segments for {} domain intervals",
            self.flow_segments.len(),
            self.domain.len()
        );
        let mut xs = Vec::with_capacity(self.flow_segments.len());
        let mut us = Vec::with_capacity(self.flow_segments.len());
        for (k, (seg, iv)) in self.flow_segments.iter().zip(&self.domain).enumerate() {
            let (Some(first), Some(last)) = (seg.samples.first(), seg.samples.last()) else {
                bail!("flow_segments[{k}]: no samples");
            };
            ensure!(seg.j == k && iv.j == k, "flow_segments[{k}]: interval index {} out of order", seg.j);
            ensure!(
                first.t == iv.t_start && last.t == iv.t_end,
                "flow_segments[{k}]: samples span [{}, {}] but domain interval is [{}, {}]",
                first.t,
                last.t,
                iv.t_start,
                iv.t_end
            );
            xs.push(seg.samples.iter().map(|s| Sample::new(s.t, s.x.clone())).collect::<Vec<_>>());
            us.push(seg.samples.iter().map(|s| Sample::new(s.t, s.u.clone())).collect::<Vec<_>>());
        }
        let state_dim = self.flow_segments[0].samples[0].x.len();
        let input_dim = self.flow_segments[0].samples[0].u.len();
        let pair = SolutionPair::new(
            HybridSignal::new(state_dim, xs).context("flow_segments: bad state samples")?,
            HybridSignal::new(input_dim, us).context("flow_segments: bad input samples")?,
        )
        .context("flow_segments: state and input grids differ")?;
        let expected = Self::from_pair(&pair, &self.system, self.metadata.clone()).jumps;
        ensure!(
            expected == self.jumps,
            "jumps: records do not match the segment boundaries"
        );
        Ok(pair)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read plan {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed plan file {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(())
}
