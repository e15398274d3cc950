//! Seeded discrete-event simulation of batch job processing on a multi-core
//! pool.
//!
//! Batches arrive either as a Poisson stream described by a
//! [`WorkloadSpec`] or as radio subframes from a [`RadioWorkload`]. Every job
//! of a batch has its service requirement drawn at arrival, so disciplines
//! fed from the same seed see identical work. A batch's sojourn ends when its
//! last job completes.
//!
//! Runs are single-threaded and bit-reproducible for a given
//! `(seed, config)`. Replications use disjoint RNG streams (see [`rng`]) and
//! run in parallel.

mod engine;
mod metrics;
pub mod rng;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use metrics::{
    Audit, BatchRecord, DeadlineExceedance, ReplicatedMetrics, ReplicatedSummary, SimMetrics,
    SimSummary, BATCH_MEANS_GROUPS,
};
pub use stats::Estimate;

use crate::error::{invalid, Error, Result};
use crate::model::{
    offered_load, Impatience, Parallelism, RadioWorkload, SystemSpec, WorkloadSpec,
};

/// Warmup used when none is configured, as a fraction of the horizon.
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Workload {
    Poisson(WorkloadSpec),
    Radio(RadioWorkload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimConfigRepr")]
pub struct SimConfig {
    workload: Workload,
    system: SystemSpec,
    horizon: f64,
    warmup: f64,
    seed: u64,
    replications: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfigRepr {
    workload: Workload,
    system: SystemSpec,
    horizon: f64,
    warmup: Option<f64>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one")]
    replications: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<SimConfigRepr> for SimConfig {
    type Error = Error;

    fn try_from(r: SimConfigRepr) -> Result<Self> {
        let mut c = SimConfig::new(r.workload, r.system, r.horizon, r.seed)?;
        if let Some(w) = r.warmup {
            c = c.with_warmup(w)?;
        }
        c.with_replications(r.replications)
    }
}

impl SimConfig {
    /// Configuration with warmup at 10% of the horizon and one replication.
    pub fn new(workload: Workload, system: SystemSpec, horizon: f64, seed: u64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("horizon must be > 0, got {horizon}")));
        }
        Ok(SimConfig {
            workload,
            system,
            horizon,
            warmup: DEFAULT_WARMUP_FRACTION * horizon,
            seed,
            replications: 1,
        })
    }

    pub fn poisson(w: WorkloadSpec, system: SystemSpec, horizon: f64, seed: u64) -> Result<Self> {
        SimConfig::new(Workload::Poisson(w), system, horizon, seed)
    }

    pub fn radio(r: RadioWorkload, system: SystemSpec, horizon: f64, seed: u64) -> Result<Self> {
        SimConfig::new(Workload::Radio(r), system, horizon, seed)
    }

    pub fn with_warmup(mut self, warmup: f64) -> Result<Self> {
        if !(warmup >= 0.0 && warmup < self.horizon) {
            return Err(invalid(format!(
                "warmup must satisfy 0 <= warmup < horizon, got {warmup}"
            )));
        }
        self.warmup = warmup;
        Ok(self)
    }

    pub fn with_replications(mut self, replications: u32) -> Result<Self> {
        if replications == 0 {
            return Err(invalid("replications must be >= 1"));
        }
        self.replications = replications;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_system(mut self, system: SystemSpec) -> Self {
        self.system = system;
        self
    }

    pub fn with_workload(mut self, workload: Workload) -> Self {
        self.workload = workload;
        self
    }

    /// Keep the warmup fraction when changing the horizon.
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        let fraction = self.warmup / self.horizon;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("horizon must be > 0, got {horizon}")));
        }
        self.horizon = horizon;
        self.warmup = fraction * horizon;
        Ok(self)
    }

    pub fn workload(&self) -> &Workload {
        &self.workload
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn warmup(&self) -> f64 {
        self.warmup
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replications(&self) -> u32 {
        self.replications
    }

    /// Work offered per core. Radio workloads ignore per-job overhead.
    pub fn offered_load(&self) -> f64 {
        match &self.workload {
            Workload::Poisson(w) => offered_load(w, self.system.cores()).rho,
            Workload::Radio(r) => r.mean_work_rate() / f64::from(self.system.cores()),
        }
    }
}

/// Run replication 0 of `config`.
///
/// Configurations with `rho >= 1` still run; the result carries
/// `unstable = true`.
pub fn run(config: &SimConfig) -> SimMetrics {
    run_replication(config, 0)
}

pub fn run_replication(config: &SimConfig, replication: u32) -> SimMetrics {
    engine::Engine::new(config, replication).run()
}

/// Run a radio workload once per parallelism mode, on the same seed.
pub fn run_radio(
    config: &SimConfig,
    modes: &[Parallelism],
) -> Result<Vec<(Parallelism, SimMetrics)>> {
    let Workload::Radio(radio) = config.workload() else {
        return Err(invalid("run_radio needs a radio workload"));
    };
    Ok(modes
        .par_iter()
        .map(|mode| {
            let cfg = config
                .clone()
                .with_workload(Workload::Radio(radio.with_parallelism(*mode)));
            (*mode, run(&cfg))
        })
        .collect())
}

/// Run a configuration whose batches renege at their deadline.
pub fn run_impatient(config: &SimConfig) -> Result<SimMetrics> {
    match config.system().impatience() {
        Impatience::BatchDeadline { .. } => Ok(run(config)),
        Impatience::None => Err(invalid(
            "run_impatient needs a BatchDeadline impatience policy",
        )),
    }
}

/// Run `config.replications()` independent replications in parallel.
pub fn replicate(config: &SimConfig) -> Result<ReplicatedMetrics> {
    let n = config.replications();
    if n < 2 {
        return Err(invalid(format!(
            "replicate needs at least 2 replications, got {n}"
        )));
    }
    let runs = (0..n)
        .into_par_iter()
        .map(|i| run_replication(config, i))
        .collect();
    Ok(ReplicatedMetrics::new(runs))
}
