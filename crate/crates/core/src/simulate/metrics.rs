use std::io::{self, Write};

use serde::Serialize;

use super::stats::{batch_means, mean_estimate, quantile_sorted, Estimate};

/// Contiguous groups used for batch-means intervals within one run.
pub const BATCH_MEANS_GROUPS: usize = 50;

/// One observed batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchRecord {
    pub batch_id: u64,
    pub arrival_ms: f64,
    pub sojourn_ms: f64,
    pub reneged: bool,
}

/// Internal consistency counters collected while the engine runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Audit {
    pub events: u64,
    /// Event instants at which a core was idle while a live job waited.
    pub work_conservation_violations: u64,
    /// Largest spread of service received by resident jobs between two
    /// processor-sharing events, in ms of work.
    pub ps_share_max_deviation: f64,
}

/// Results of one simulation run.
///
/// Sojourn samples are kept in arrival order. A reneged batch is recorded
/// with sojourn equal to its deadline; the CDF convention is
/// `F(t) = #{T < t} / n`, so that `exceedance(t) = 1 - F(t)` counts
/// reneged batches as exceeding their deadline.
#[derive(Debug, Clone, Serialize)]
pub struct SimMetrics {
    #[serde(skip)]
    records: Vec<BatchRecord>,
    #[serde(skip)]
    sorted: Vec<f64>,
    #[serde(skip)]
    occupancy: Vec<f64>,
    pub batches_observed: u64,
    pub batches_reneged: u64,
    pub reneged_fraction: f64,
    pub mean_sojourn: f64,
    pub p99: f64,
    pub core_utilization: f64,
    pub mean_jobs_in_system: f64,
    pub jobs_observed: u64,
    pub mean_job_sojourn: f64,
    /// Jobs per ms that arrived in the measurement window.
    pub job_arrival_rate: f64,
    pub offered_load: f64,
    /// Set when the configuration has `rho >= 1`.
    pub unstable: bool,
    pub warmup: f64,
    pub horizon: f64,
    pub audit: Audit,
}

pub(crate) struct RawMetrics {
    pub records: Vec<BatchRecord>,
    pub busy_area: f64,
    pub jobs_area: f64,
    pub occupancy_time: Vec<f64>,
    pub capacity: f64,
    pub jobs_observed: u64,
    pub job_sojourn_sum: f64,
    pub offered_load: f64,
    pub warmup: f64,
    pub horizon: f64,
    pub audit: Audit,
}

impl SimMetrics {
    pub(crate) fn from_raw(raw: RawMetrics) -> Self {
        let window = raw.horizon - raw.warmup;
        let n = raw.records.len();
        let reneged = raw.records.iter().filter(|r| r.reneged).count() as u64;
        let mut sorted: Vec<f64> = raw.records.iter().map(|r| r.sojourn_ms).collect();
        sorted.sort_by(f64::total_cmp);
        let mean_sojourn = if n == 0 {
            f64::NAN
        } else {
            sorted.iter().sum::<f64>() / n as f64
        };
        SimMetrics {
            batches_observed: n as u64,
            batches_reneged: reneged,
            reneged_fraction: if n == 0 {
                0.0
            } else {
                reneged as f64 / n as f64
            },
            mean_sojourn,
            p99: quantile_sorted(&sorted, 0.99),
            core_utilization: raw.busy_area / (raw.capacity * window),
            mean_jobs_in_system: raw.jobs_area / window,
            jobs_observed: raw.jobs_observed,
            mean_job_sojourn: if raw.jobs_observed == 0 {
                f64::NAN
            } else {
                raw.job_sojourn_sum / raw.jobs_observed as f64
            },
            job_arrival_rate: raw.jobs_observed as f64 / window,
            offered_load: raw.offered_load,
            unstable: raw.offered_load >= 1.0,
            warmup: raw.warmup,
            horizon: raw.horizon,
            audit: raw.audit,
            records: raw.records,
            sorted,
            occupancy: raw.occupancy_time.iter().map(|t| t / window).collect(),
        }
    }

    /// Observed batches in arrival order.
    pub fn records(&self) -> &[BatchRecord] {
        &self.records
    }

    /// Fraction of the measurement window spent with `n` jobs in the
    /// system, indexed by `n`.
    pub fn occupancy_distribution(&self) -> &[f64] {
        &self.occupancy
    }

    pub fn sojourn_samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.sojourn_ms)
    }

    pub fn sorted_sojourns(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{T < t} / n`.
    pub fn cdf(&self, t: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        self.sorted.partition_point(|s| *s < t) as f64 / self.sorted.len() as f64
    }

    /// Step points `(t_i, F)` of the empirical CDF, one per sample.
    pub fn empirical_cdf(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, (i + 1) as f64 / n))
            .collect()
    }

    /// `points` evenly spaced probability levels of the CDF.
    pub fn cdf_points(&self, points: usize) -> Vec<(f64, f64)> {
        if self.sorted.is_empty() || points == 0 {
            return Vec::new();
        }
        (1..=points)
            .map(|i| {
                let p = i as f64 / points as f64;
                (quantile_sorted(&self.sorted, p), p)
            })
            .collect()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.sorted, p)
    }

    /// `P(T >= deadline)` with a batch-means 95% interval.
    pub fn exceedance(&self, deadline: f64) -> Estimate {
        let ind: Vec<f64> = self
            .records
            .iter()
            .map(|r| f64::from(u8::from(r.sojourn_ms >= deadline)))
            .collect();
        batch_means(&ind, BATCH_MEANS_GROUPS)
    }

    pub fn mean_sojourn_estimate(&self) -> Estimate {
        let v: Vec<f64> = self.sojourn_samples().collect();
        batch_means(&v, BATCH_MEANS_GROUPS)
    }

    /// Relative gap between time-average occupancy and
    /// `job_rate * mean job sojourn`.
    pub fn little_law_gap(&self, job_rate: f64) -> f64 {
        let predicted = job_rate * self.mean_job_sojourn;
        (self.mean_jobs_in_system - predicted).abs() / predicted
    }

    pub fn summary(&self, deadlines: &[f64], cdf_points: usize) -> SimSummary {
        SimSummary {
            metrics: self.clone(),
            exceedance: deadlines
                .iter()
                .map(|d| DeadlineExceedance {
                    deadline: *d,
                    estimate: self.exceedance(*d),
                })
                .collect(),
            cdf: self.cdf_points(cdf_points),
        }
    }

    /// CSV with columns `batch_id,arrival_ms,sojourn_ms,reneged`.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "batch_id,arrival_ms,sojourn_ms,reneged")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                r.batch_id, r.arrival_ms, r.sojourn_ms, r.reneged
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeadlineExceedance {
    pub deadline: f64,
    #[serde(flatten)]
    pub estimate: Estimate,
}

/// JSON view of a run: scalar metrics, exceedance at chosen deadlines and a
/// downsampled CDF.
#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    #[serde(flatten)]
    pub metrics: SimMetrics,
    pub exceedance: Vec<DeadlineExceedance>,
    pub cdf: Vec<(f64, f64)>,
}

/// Independent replications of one configuration.
#[derive(Debug, Clone)]
pub struct ReplicatedMetrics {
    runs: Vec<SimMetrics>,
}

impl ReplicatedMetrics {
    pub(crate) fn new(runs: Vec<SimMetrics>) -> Self {
        ReplicatedMetrics { runs }
    }

    pub fn runs(&self) -> &[SimMetrics] {
        &self.runs
    }

    fn across(&self, f: impl Fn(&SimMetrics) -> f64) -> Estimate {
        let v: Vec<f64> = self.runs.iter().map(f).collect();
        mean_estimate(&v)
    }

    pub fn exceedance(&self, deadline: f64) -> Estimate {
        self.across(|m| m.exceedance(deadline).value)
    }

    pub fn p99(&self) -> Estimate {
        self.across(|m| m.p99)
    }

    pub fn mean_sojourn(&self) -> Estimate {
        self.across(|m| m.mean_sojourn)
    }

    pub fn reneged_fraction(&self) -> Estimate {
        self.across(|m| m.reneged_fraction)
    }

    pub fn core_utilization(&self) -> Estimate {
        self.across(|m| m.core_utilization)
    }

    pub fn summary(&self, deadlines: &[f64]) -> ReplicatedSummary {
        ReplicatedSummary {
            replications: self.runs.len(),
            batches_observed: self.runs.iter().map(|m| m.batches_observed).sum(),
            mean_sojourn: self.mean_sojourn(),
            p99: self.p99(),
            reneged_fraction: self.reneged_fraction(),
            core_utilization: self.core_utilization(),
            exceedance: deadlines
                .iter()
                .map(|d| DeadlineExceedance {
                    deadline: *d,
                    estimate: self.exceedance(*d),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicatedSummary {
    pub replications: usize,
    pub batches_observed: u64,
    pub mean_sojourn: Estimate,
    pub p99: Estimate,
    pub reneged_fraction: Estimate,
    pub core_utilization: Estimate,
    pub exceedance: Vec<DeadlineExceedance>,
}
