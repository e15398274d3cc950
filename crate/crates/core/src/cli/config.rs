//! JSON experiment configs, one per subcommand. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::dimension::ScanStrategy;
use crate::fronthaul::FronthaulSpec;
use crate::model::{Discipline, Impatience, LatencyTarget, Parallelism, SystemSpec, WorkloadSpec};
use crate::simulate::{SimConfig, Workload};
use crate::Result;

fn default_points() -> usize {
    101
}

fn default_cdf_points() -> usize {
    200
}

fn one() -> u32 {
    1
}

fn one_f() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub workload: WorkloadSpec,
    pub cores: u32,
    /// Tail grid `0, t_max / (points - 1), .., t_max`.
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Fixed truncation level; chosen automatically when absent.
    #[serde(default)]
    pub truncation: Option<usize>,
    /// Deadline whose exceedance is reported in the summary.
    #[serde(default)]
    pub deadline: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub workload: Workload,
    pub system: SystemSpec,
    pub horizon: f64,
    #[serde(default)]
    pub warmup: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: u32,
    /// Deadlines whose exceedance is reported with a 95% interval.
    #[serde(default)]
    pub deadlines: Vec<f64>,
    #[serde(default = "default_cdf_points")]
    pub cdf_points: usize,
    /// Also write every observed batch to a samples CSV.
    #[serde(default)]
    pub samples: bool,
    /// Parallelism modes run side by side for radio workloads; all three
    /// when absent.
    #[serde(default)]
    pub modes: Option<Vec<Parallelism>>,
    /// Run configurations with `rho >= 1` instead of rejecting them.
    #[serde(default)]
    pub allow_unstable: bool,
}

impl SimulateConfig {
    pub fn sim_config(&self, seed: u64, replications: u32) -> Result<SimConfig> {
        let mut c = SimConfig::new(
            self.workload.clone(),
            self.system.clone(),
            self.horizon,
            seed,
        )?;
        if let Some(w) = self.warmup {
            c = c.with_warmup(w)?;
        }
        c.with_replications(replications)
    }
}

/// Simulation settings for commands that can swap in the simulation
/// backend. The core count is set by the command.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub horizon: f64,
    #[serde(default)]
    pub warmup: Option<f64>,
    #[serde(default = "one")]
    pub replications: u32,
    #[serde(default = "greedy")]
    pub discipline: Discipline,
}

fn greedy() -> Discipline {
    Discipline::GreedyFcfs
}

impl SimSettings {
    pub fn template(&self, w: &WorkloadSpec, seed: u64, replications: u32) -> Result<SimConfig> {
        let system = SystemSpec::new(1, self.discipline.clone(), Impatience::None)?;
        let mut c = SimConfig::poisson(w.clone(), system, self.horizon, seed)?;
        if let Some(warmup) = self.warmup {
            c = c.with_warmup(warmup)?;
        }
        c.with_replications(replications)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Analytic,
    Sim,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionConfig {
    pub workload: WorkloadSpec,
    pub target: LatencyTarget,
    /// Largest core count tried; `4 C_s` when absent.
    #[serde(default)]
    pub c_max: Option<u32>,
    #[serde(default)]
    pub strategy: ScanStrategy,
    #[serde(default)]
    pub backend: Option<BackendChoice>,
    /// Required with the simulation backend.
    #[serde(default)]
    pub simulation: Option<SimSettings>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FronthaulConfig {
    #[serde(default)]
    pub spec: FronthaulSpec,
    #[serde(default = "one")]
    pub n_cells: u32,
    #[serde(default = "one_f")]
    pub load_factor: f64,
    /// One-way latency budget converted to a maximum fiber length.
    #[serde(default)]
    pub latency_budget_ms: Option<f64>,
}

impl Default for FronthaulConfig {
    fn default() -> Self {
        FronthaulConfig {
            spec: FronthaulSpec::default(),
            n_cells: 1,
            load_factor: 1.0,
            latency_budget_ms: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepRange {
    /// `from, from + step, ..` up to `to` inclusive, tolerating rounding.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor();
        (0..=n as usize)
            .map(|i| ((self.from + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub workload: WorkloadSpec,
    pub cores: u32,
    pub deadline: f64,
    /// One of `cores`, `q`, `arrival_rate`, `service_rate`, `deadline`.
    pub field: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<SweepRange>,
    #[serde(default)]
    pub backend: Option<BackendChoice>,
    #[serde(default)]
    pub simulation: Option<SimSettings>,
    #[serde(default)]
    pub seed: u64,
}
