//! Domain types of the batch-arrival multi-core model.
//!
//! Time is measured in milliseconds throughout and every rate is per
//! millisecond, so one TTI is exactly `1.0`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// CRC bits appended to every code block by segmentation.
pub const CB_CRC_BITS: u32 = 24;

const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Law of the number of jobs carried by one arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BatchLaw {
    /// `P(B = k) = (1 - q) q^(k-1)` for `k >= 1`.
    Geometric {
        q: f64,
    },
    Deterministic {
        k: u32,
    },
    Empirical {
        pmf: BTreeMap<u32, f64>,
    },
}

impl BatchLaw {
    pub fn geometric(q: f64) -> Result<Self> {
        let law = BatchLaw::Geometric { q };
        law.validate()?;
        Ok(law)
    }

    pub fn deterministic(k: u32) -> Result<Self> {
        let law = BatchLaw::Deterministic { k };
        law.validate()?;
        Ok(law)
    }

    pub fn empirical(pmf: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let law = BatchLaw::Empirical {
            pmf: pmf.into_iter().collect(),
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BatchLaw::Geometric { q } => {
                if !(0.0..1.0).contains(q) {
                    return Err(invalid(format!("geometric q must lie in [0, 1), got {q}")));
                }
            }
            BatchLaw::Deterministic { k } => {
                if *k == 0 {
                    return Err(invalid("deterministic batch size must be >= 1"));
                }
            }
            BatchLaw::Empirical { pmf } => {
                if pmf.is_empty() {
                    return Err(invalid("empirical batch law has an empty support"));
                }
                if pmf.contains_key(&0) {
                    return Err(invalid("empirical batch law support must be >= 1"));
                }
                if pmf.values().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(invalid(
                        "empirical batch probabilities must be finite and >= 0",
                    ));
                }
                let total: f64 = pmf.values().sum();
                if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
                    return Err(invalid(format!(
                        "empirical batch probabilities sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            BatchLaw::Geometric { q } => 1.0 / (1.0 - q),
            BatchLaw::Deterministic { k } => f64::from(*k),
            BatchLaw::Empirical { pmf } => pmf.iter().map(|(k, p)| f64::from(*k) * p).sum(),
        }
    }

    /// `P(B = k)`.
    pub fn pmf(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            BatchLaw::Geometric { q } => (1.0 - q) * q.powi(k as i32 - 1),
            BatchLaw::Deterministic { k: size } => f64::from(u8::from(k == *size)),
            BatchLaw::Empirical { pmf } => pmf.get(&k).copied().unwrap_or(0.0),
        }
    }

    /// `P(B > k)`.
    pub fn tail(&self, k: u32) -> f64 {
        match self {
            BatchLaw::Geometric { q } => q.powi(k as i32),
            BatchLaw::Deterministic { k: size } => f64::from(u8::from(k < *size)),
            BatchLaw::Empirical { pmf } => pmf.range(k + 1..).map(|(_, p)| p).sum(),
        }
    }

    /// Probability generating function `E[z^B]` for `z` in `[0, 1]`.
    pub fn pgf(&self, z: f64) -> f64 {
        match self {
            BatchLaw::Geometric { q } => (1.0 - q) * z / (1.0 - q * z),
            BatchLaw::Deterministic { k } => z.powi(*k as i32),
            BatchLaw::Empirical { pmf } => pmf.iter().map(|(k, p)| p * z.powi(*k as i32)).sum(),
        }
    }

    /// Largest batch size with positive probability, `None` when unbounded.
    pub fn max_support(&self) -> Option<u32> {
        match self {
            BatchLaw::Geometric { q } if *q == 0.0 => Some(1),
            BatchLaw::Geometric { .. } => None,
            BatchLaw::Deterministic { k } => Some(*k),
            BatchLaw::Empirical { pmf } => {
                pmf.iter().rev().find(|(_, p)| **p > 0.0).map(|(k, _)| *k)
            }
        }
    }

    /// Smallest `r` with `P(B > r) <= eps`.
    pub fn quantile_cutoff(&self, eps: f64) -> u32 {
        if let Some(max) = self.max_support() {
            return max;
        }
        let mut r = 1;
        while self.tail(r) > eps {
            r += 1;
        }
        r
    }

    pub fn sampler(&self) -> BatchSampler {
        match self {
            BatchLaw::Geometric { q } => {
                BatchSampler::Geometric(Geometric::new(1.0 - q).expect("validated q"))
            }
            BatchLaw::Deterministic { k } => BatchSampler::Fixed(*k),
            BatchLaw::Empirical { pmf } => {
                let mut acc = 0.0;
                let mut values = Vec::with_capacity(pmf.len());
                let mut cumulative = Vec::with_capacity(pmf.len());
                for (k, p) in pmf {
                    acc += p;
                    values.push(*k);
                    cumulative.push(acc);
                }
                BatchSampler::Table { values, cumulative }
            }
        }
    }
}

/// Draws batch sizes from a [`BatchLaw`].
#[derive(Debug, Clone)]
pub enum BatchSampler {
    Geometric(Geometric),
    Fixed(u32),
    Table {
        values: Vec<u32>,
        cumulative: Vec<f64>,
    },
}

impl BatchSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            // rand_distr counts failures before the first success.
            BatchSampler::Geometric(g) => (g.sample(rng) as u32).saturating_add(1),
            BatchSampler::Fixed(k) => *k,
            BatchSampler::Table { values, cumulative } => {
                let u: f64 = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
                let idx = cumulative.partition_point(|c| *c <= u);
                values[idx.min(values.len() - 1)]
            }
        }
    }
}

/// Poisson batch arrivals with exponential per-job service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorkloadSpecRepr")]
pub struct WorkloadSpec {
    arrival_rate: f64,
    batch_law: BatchLaw,
    service_rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadSpecRepr {
    arrival_rate: f64,
    batch_law: BatchLaw,
    service_rate: f64,
}

impl TryFrom<WorkloadSpecRepr> for WorkloadSpec {
    type Error = Error;

    fn try_from(r: WorkloadSpecRepr) -> Result<Self> {
        WorkloadSpec::new(r.arrival_rate, r.batch_law, r.service_rate)
    }
}

impl WorkloadSpec {
    pub fn new(arrival_rate: f64, batch_law: BatchLaw, service_rate: f64) -> Result<Self> {
        if !(arrival_rate.is_finite() && arrival_rate > 0.0) {
            return Err(invalid(format!(
                "arrival_rate must be > 0, got {arrival_rate}"
            )));
        }
        if !(service_rate.is_finite() && service_rate > 0.0) {
            return Err(invalid(format!(
                "service_rate must be > 0, got {service_rate}"
            )));
        }
        batch_law.validate()?;
        Ok(WorkloadSpec {
            arrival_rate,
            batch_law,
            service_rate,
        })
    }

    /// Batches per millisecond.
    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    pub fn batch_law(&self) -> &BatchLaw {
        &self.batch_law
    }

    /// Job completions per millisecond per core.
    pub fn service_rate(&self) -> f64 {
        self.service_rate
    }

    /// Offered traffic in Erlangs, `lambda E[B] / mu`.
    pub fn offered_erlangs(&self) -> f64 {
        self.arrival_rate * self.batch_law.mean() / self.service_rate
    }

    pub fn with_arrival_rate(&self, arrival_rate: f64) -> Result<Self> {
        WorkloadSpec::new(arrival_rate, self.batch_law.clone(), self.service_rate)
    }

    pub fn with_service_rate(&self, service_rate: f64) -> Result<Self> {
        WorkloadSpec::new(self.arrival_rate, self.batch_law.clone(), service_rate)
    }

    pub fn with_batch_law(&self, batch_law: BatchLaw) -> Result<Self> {
        WorkloadSpec::new(self.arrival_rate, batch_law, self.service_rate)
    }
}

/// Load per core and the resulting stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OfferedLoad {
    pub rho: f64,
    pub stable: bool,
}

/// `rho = lambda E[B] / (mu C)`; the queue is stable iff `rho < 1`.
pub fn offered_load(w: &WorkloadSpec, cores: u32) -> OfferedLoad {
    let rho = w.offered_erlangs() / f64::from(cores.max(1));
    OfferedLoad {
        rho,
        stable: rho < 1.0,
    }
}

/// Mean of the total work of one subframe when the batch law is geometric.
///
/// A geometric sum of exponentials is exponential, with mean `1 / ((1 - q) mu)`.
pub fn subframe_service_mean(w: &WorkloadSpec) -> Result<f64> {
    match w.batch_law {
        BatchLaw::Geometric { q } => Ok(1.0 / ((1.0 - q) * w.service_rate)),
        _ => Err(Error::NotGeometric),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Discipline {
    /// Head-of-line job goes to any free core.
    GreedyFcfs,
    /// Total capacity `C mu` split equally over all resident jobs.
    ProcessorSharing,
    /// Sources are pinned to disjoint core groups, FCFS inside each group.
    Dedicated { partition: Vec<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Impatience {
    None,
    /// A batch still unfinished `deadline` ms after arrival is dropped.
    BatchDeadline {
        deadline: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemSpecRepr")]
pub struct SystemSpec {
    cores: u32,
    discipline: Discipline,
    impatience: Impatience,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSpecRepr {
    cores: u32,
    #[serde(default = "default_discipline")]
    discipline: Discipline,
    #[serde(default = "default_impatience")]
    impatience: Impatience,
}

fn default_discipline() -> Discipline {
    Discipline::GreedyFcfs
}

fn default_impatience() -> Impatience {
    Impatience::None
}

impl TryFrom<SystemSpecRepr> for SystemSpec {
    type Error = Error;

    fn try_from(r: SystemSpecRepr) -> Result<Self> {
        SystemSpec::new(r.cores, r.discipline, r.impatience)
    }
}

impl SystemSpec {
    pub fn new(cores: u32, discipline: Discipline, impatience: Impatience) -> Result<Self> {
        if cores == 0 {
            return Err(invalid("cores must be >= 1"));
        }
        if let Discipline::Dedicated { partition } = &discipline {
            if partition.is_empty() || partition.contains(&0) {
                return Err(invalid("dedicated partition entries must be >= 1"));
            }
            let total: u64 = partition.iter().map(|c| u64::from(*c)).sum();
            if total != u64::from(cores) {
                return Err(invalid(format!(
                    "dedicated partition sums to {total}, expected {cores} cores"
                )));
            }
        }
        if let Impatience::BatchDeadline { deadline } = impatience {
            if !(deadline > 0.0) {
                return Err(invalid(format!("deadline must be > 0, got {deadline}")));
            }
        }
        Ok(SystemSpec {
            cores,
            discipline,
            impatience,
        })
    }

    pub fn greedy(cores: u32) -> Result<Self> {
        SystemSpec::new(cores, Discipline::GreedyFcfs, Impatience::None)
    }

    pub fn cores(&self) -> u32 {
        self.cores
    }

    pub fn discipline(&self) -> &Discipline {
        &self.discipline
    }

    pub fn impatience(&self) -> Impatience {
        self.impatience
    }

    pub fn with_cores(&self, cores: u32) -> Result<Self> {
        let discipline = match &self.discipline {
            Discipline::Dedicated { .. } => {
                return Err(invalid("cannot rescale a dedicated partition"));
            }
            d => d.clone(),
        };
        SystemSpec::new(cores, discipline, self.impatience)
    }

    pub fn with_impatience(&self, impatience: Impatience) -> Result<Self> {
        SystemSpec::new(self.cores, self.discipline.clone(), impatience)
    }
}

/// Distribution of the transport-block size of one UE, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TbSizeLaw {
    Fixed {
        bits: u32,
    },
    /// Uniform over the integers `min..=max`.
    Uniform {
        min: u32,
        max: u32,
    },
    Empirical {
        pmf: BTreeMap<u32, f64>,
    },
}

impl TbSizeLaw {
    fn validate(&self) -> Result<()> {
        match self {
            TbSizeLaw::Fixed { bits } if *bits == 0 => Err(invalid("TB size must be >= 1 bit")),
            TbSizeLaw::Uniform { min, max } if *min == 0 || min > max => {
                Err(invalid("TB uniform law needs 1 <= min <= max"))
            }
            TbSizeLaw::Empirical { pmf } => BatchLaw::Empirical { pmf: pmf.clone() }.validate(),
            _ => Ok(()),
        }
    }

    pub fn mean_bits(&self) -> f64 {
        match self {
            TbSizeLaw::Fixed { bits } => f64::from(*bits),
            TbSizeLaw::Uniform { min, max } => 0.5 * (f64::from(*min) + f64::from(*max)),
            TbSizeLaw::Empirical { pmf } => pmf.iter().map(|(k, p)| f64::from(*k) * p).sum(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            TbSizeLaw::Fixed { bits } => *bits,
            TbSizeLaw::Uniform { min, max } => rng.random_range(*min..=*max),
            TbSizeLaw::Empirical { pmf } => BatchLaw::Empirical { pmf: pmf.clone() }
                .sampler()
                .sample(rng),
        }
    }
}

/// Granularity at which a subframe is split into parallel jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    /// One job for the whole subframe.
    Subframe,
    /// One job per UE transport block.
    PerUe,
    /// One job per code block.
    PerCb,
}

impl Parallelism {
    pub const ALL: [Parallelism; 3] = [
        Parallelism::Subframe,
        Parallelism::PerUe,
        Parallelism::PerCb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Parallelism::Subframe => "subframe",
            Parallelism::PerUe => "per_ue",
            Parallelism::PerCb => "per_cb",
        }
    }
}

/// How subframes of different cells are placed in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadioArrivals {
    /// Each cell ticks every TTI with its own uniform random phase.
    PhasedTti,
    /// Aggregate Poisson stream of rate `n_cells / tti`.
    Poisson,
}

/// Processing time of a job carrying `bits` of payload:
/// `overhead_ms + bits / 1000 * ms_per_kbit * X` with `X ~ Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobCost {
    pub ms_per_kbit: f64,
    #[serde(default)]
    pub overhead_ms: f64,
}

impl JobCost {
    pub fn mean_ms(&self, bits: u64) -> f64 {
        self.overhead_ms + bits as f64 / 1000.0 * self.ms_per_kbit
    }

    pub fn sample<R: Rng + ?Sized>(&self, bits: u64, rng: &mut R) -> f64 {
        let x: f64 = Exp1.sample(rng);
        self.overhead_ms + bits as f64 / 1000.0 * self.ms_per_kbit * x
    }
}

/// Multi-cell radio workload feeding the baseband pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadioWorkloadRepr")]
pub struct RadioWorkload {
    n_cells: u32,
    tti: f64,
    ue_law: BatchLaw,
    tb_bits_law: TbSizeLaw,
    cb_max_bits: u32,
    parallelism: Parallelism,
    job_cost: JobCost,
    arrivals: RadioArrivals,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioWorkloadRepr {
    n_cells: u32,
    #[serde(default = "default_tti")]
    tti: f64,
    ue_law: BatchLaw,
    tb_bits_law: TbSizeLaw,
    #[serde(default = "default_cb_max_bits")]
    cb_max_bits: u32,
    #[serde(default = "default_parallelism")]
    parallelism: Parallelism,
    job_cost: JobCost,
    #[serde(default = "default_arrivals")]
    arrivals: RadioArrivals,
}

fn default_tti() -> f64 {
    1.0
}

fn default_cb_max_bits() -> u32 {
    6144
}

fn default_parallelism() -> Parallelism {
    Parallelism::Subframe
}

fn default_arrivals() -> RadioArrivals {
    RadioArrivals::PhasedTti
}

impl TryFrom<RadioWorkloadRepr> for RadioWorkload {
    type Error = Error;

    fn try_from(r: RadioWorkloadRepr) -> Result<Self> {
        RadioWorkload::builder(r.n_cells, r.ue_law, r.tb_bits_law, r.job_cost)
            .tti(r.tti)
            .cb_max_bits(r.cb_max_bits)
            .parallelism(r.parallelism)
            .arrivals(r.arrivals)
            .build()
    }
}

#[derive(Debug, Clone)]
pub struct RadioWorkloadBuilder {
    inner: RadioWorkload,
}

impl RadioWorkloadBuilder {
    pub fn tti(mut self, tti: f64) -> Self {
        self.inner.tti = tti;
        self
    }

    pub fn cb_max_bits(mut self, bits: u32) -> Self {
        self.inner.cb_max_bits = bits;
        self
    }

    pub fn parallelism(mut self, p: Parallelism) -> Self {
        self.inner.parallelism = p;
        self
    }

    pub fn arrivals(mut self, a: RadioArrivals) -> Self {
        self.inner.arrivals = a;
        self
    }

    pub fn build(self) -> Result<RadioWorkload> {
        let r = self.inner;
        if r.n_cells == 0 {
            return Err(invalid("n_cells must be >= 1"));
        }
        if !(r.tti.is_finite() && r.tti > 0.0) {
            return Err(invalid(format!("tti must be > 0, got {}", r.tti)));
        }
        if r.cb_max_bits < 40 {
            return Err(invalid("cb_max_bits must be >= 40"));
        }
        if !(r.job_cost.ms_per_kbit >= 0.0 && r.job_cost.overhead_ms >= 0.0)
            || r.job_cost.ms_per_kbit + r.job_cost.overhead_ms <= 0.0
        {
            return Err(invalid("job_cost must be nonnegative with positive total"));
        }
        r.ue_law.validate()?;
        r.tb_bits_law.validate()?;
        Ok(r)
    }
}

impl RadioWorkload {
    pub fn builder(
        n_cells: u32,
        ue_law: BatchLaw,
        tb_bits_law: TbSizeLaw,
        job_cost: JobCost,
    ) -> RadioWorkloadBuilder {
        RadioWorkloadBuilder {
            inner: RadioWorkload {
                n_cells,
                tti: default_tti(),
                ue_law,
                tb_bits_law,
                cb_max_bits: default_cb_max_bits(),
                parallelism: default_parallelism(),
                job_cost,
                arrivals: default_arrivals(),
            },
        }
    }

    pub fn n_cells(&self) -> u32 {
        self.n_cells
    }

    pub fn tti(&self) -> f64 {
        self.tti
    }

    pub fn ue_law(&self) -> &BatchLaw {
        &self.ue_law
    }

    pub fn tb_bits_law(&self) -> &TbSizeLaw {
        &self.tb_bits_law
    }

    pub fn cb_max_bits(&self) -> u32 {
        self.cb_max_bits
    }

    pub fn parallelism(&self) -> Parallelism {
        self.parallelism
    }

    pub fn job_cost(&self) -> JobCost {
        self.job_cost
    }

    pub fn arrivals(&self) -> RadioArrivals {
        self.arrivals
    }

    pub fn with_parallelism(&self, parallelism: Parallelism) -> Self {
        RadioWorkload {
            parallelism,
            ..self.clone()
        }
    }

    /// Subframes per millisecond over all cells.
    pub fn subframe_rate(&self) -> f64 {
        f64::from(self.n_cells) / self.tti
    }

    /// Mean core-milliseconds of work per millisecond, ignoring per-job overhead.
    pub fn mean_work_rate(&self) -> f64 {
        self.subframe_rate() * self.ue_law.mean() * self.tb_bits_law.mean_bits() / 1000.0
            * self.job_cost.ms_per_kbit
    }
}

/// Number of code blocks a transport block of `tb_bits` is segmented into.
pub fn code_block_count(tb_bits: u32, cb_max_bits: u32) -> u32 {
    if tb_bits <= cb_max_bits {
        1
    } else {
        tb_bits.div_ceil(cb_max_bits - CB_CRC_BITS)
    }
}

/// Job produced by splitting a subframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobDescriptor {
    /// Payload bits processed by this job.
    pub bits: u64,
    /// Index of the UE the payload belongs to, `None` for whole-subframe jobs.
    pub ue: Option<u32>,
}

/// Split a set of transport blocks into jobs according to `mode`.
pub fn split_transport_blocks(
    tb_bits: &[u32],
    mode: Parallelism,
    cb_max_bits: u32,
) -> Vec<JobDescriptor> {
    match mode {
        Parallelism::Subframe => vec![JobDescriptor {
            bits: tb_bits.iter().map(|b| u64::from(*b)).sum(),
            ue: None,
        }],
        Parallelism::PerUe => tb_bits
            .iter()
            .enumerate()
            .map(|(i, b)| JobDescriptor {
                bits: u64::from(*b),
                ue: Some(i as u32),
            })
            .collect(),
        Parallelism::PerCb => {
            let mut jobs = Vec::new();
            for (i, &s) in tb_bits.iter().enumerate() {
                let n = code_block_count(s, cb_max_bits);
                // Even split: block sizes differ by at most one bit.
                let base = s / n;
                let extra = s % n;
                for j in 0..n {
                    jobs.push(JobDescriptor {
                        bits: u64::from(base + u32::from(j < extra)),
                        ue: Some(i as u32),
                    });
                }
            }
            jobs
        }
    }
}

/// Draw the UEs of one subframe and their transport-block sizes.
pub fn sample_transport_blocks<R: Rng + ?Sized>(r: &RadioWorkload, rng: &mut R) -> Vec<u32> {
    let ues = r.ue_law.sampler().sample(rng);
    (0..ues).map(|_| r.tb_bits_law.sample(rng)).collect()
}

/// Draw one subframe and split it into jobs at the workload's granularity.
pub fn decompose_subframe<R: Rng + ?Sized>(r: &RadioWorkload, rng: &mut R) -> Vec<JobDescriptor> {
    let tbs = sample_transport_blocks(r, rng);
    split_transport_blocks(&tbs, r.parallelism, r.cb_max_bits)
}

/// Processing deadline and tolerated exceedance probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatencyTargetRepr")]
pub struct LatencyTarget {
    deadline: f64,
    tolerance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatencyTargetRepr {
    deadline: f64,
    tolerance: f64,
}

impl TryFrom<LatencyTargetRepr> for LatencyTarget {
    type Error = Error;

    fn try_from(r: LatencyTargetRepr) -> Result<Self> {
        LatencyTarget::new(r.deadline, r.tolerance)
    }
}

impl LatencyTarget {
    pub fn new(deadline: f64, tolerance: f64) -> Result<Self> {
        if !(deadline.is_finite() && deadline > 0.0) {
            return Err(invalid(format!("deadline must be > 0, got {deadline}")));
        }
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(invalid(format!(
                "tolerance must lie in (0, 1), got {tolerance}"
            )));
        }
        Ok(LatencyTarget {
            deadline,
            tolerance,
        })
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}
