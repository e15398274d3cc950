use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::metrics::{Audit, BatchRecord, RawMetrics, SimMetrics};
use super::rng::{stream, Purpose};
use super::{SimConfig, Workload};
use crate::model::{
    sample_transport_blocks, split_transport_blocks, BatchSampler, Discipline, Impatience,
    RadioArrivals,
};

/// Residual work below which a processor-sharing job counts as finished.
const PS_DONE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Arrival { source: u32 },
    Completion { pool: u32, core: u32, token: u64 },
    PsTick { epoch: u64 },
    Deadline { batch: usize },
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Min-heap on (time, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BatchState {
    Open,
    Done,
    Reneged,
}

#[derive(Debug)]
struct Batch {
    arrival: f64,
    remaining: u32,
    pool: u32,
    state: BatchState,
    observed: bool,
    sojourn: f64,
}

#[derive(Debug, Clone, Copy)]
struct QueuedJob {
    batch: usize,
    work: f64,
}

#[derive(Debug, Clone, Copy)]
struct Running {
    batch: usize,
    token: u64,
}

#[derive(Debug, Default)]
struct Pool {
    cores: Vec<Option<Running>>,
    free: Vec<u32>,
    queue: VecDeque<QueuedJob>,
    /// Queued jobs whose batch has not reneged.
    queued_live: u64,
}

impl Pool {
    fn new(cores: u32) -> Self {
        Pool {
            cores: vec![None; cores as usize],
            free: (0..cores).rev().collect(),
            ..Pool::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PsJob {
    batch: usize,
    residual: f64,
}

#[derive(Debug, Default)]
struct PsState {
    jobs: Vec<PsJob>,
    last: f64,
    epoch: u64,
}

enum Source {
    Poisson {
        gap: Exp<f64>,
        batch: BatchSampler,
        service: Exp<f64>,
    },
    Radio {
        gap: Option<Exp<f64>>,
    },
}

pub(crate) struct Engine<'a> {
    cfg: &'a SimConfig,
    now: f64,
    seq: u64,
    events: BinaryHeap<Scheduled>,
    arrivals_rng: ChaCha8Rng,
    service_rng: ChaCha8Rng,
    source: Source,
    batches: Vec<Batch>,
    pools: Vec<Pool>,
    pool_weights: Vec<f64>,
    ps: Option<PsState>,
    token: u64,
    jobs_in_system: u64,
    busy_cores: u64,
    last_stat: f64,
    busy_area: f64,
    jobs_area: f64,
    occupancy_time: Vec<f64>,
    jobs_observed: u64,
    job_sojourn_sum: f64,
    audit: Audit,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(cfg: &'a SimConfig, replication: u32) -> Self {
        let arrivals_rng = stream(cfg.seed(), replication, Purpose::Arrivals);
        let service_rng = stream(cfg.seed(), replication, Purpose::Service);
        let system = cfg.system();
        let (pools, pool_weights) = match system.discipline() {
            Discipline::Dedicated { partition } => {
                let total: u32 = partition.iter().sum();
                (
                    partition.iter().map(|c| Pool::new(*c)).collect(),
                    partition
                        .iter()
                        .map(|c| f64::from(*c) / f64::from(total))
                        .collect(),
                )
            }
            Discipline::GreedyFcfs => (vec![Pool::new(system.cores())], vec![1.0]),
            Discipline::ProcessorSharing => (Vec::new(), vec![1.0]),
        };
        let ps = matches!(system.discipline(), Discipline::ProcessorSharing).then(PsState::default);

        let mut engine = Engine {
            cfg,
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            arrivals_rng,
            service_rng,
            source: Source::Radio { gap: None },
            batches: Vec::new(),
            pools,
            pool_weights,
            ps,
            token: 0,
            jobs_in_system: 0,
            busy_cores: 0,
            last_stat: 0.0,
            busy_area: 0.0,
            jobs_area: 0.0,
            occupancy_time: Vec::new(),
            jobs_observed: 0,
            job_sojourn_sum: 0.0,
            audit: Audit::default(),
        };

        match cfg.workload() {
            Workload::Poisson(w) => {
                let gap = Exp::new(w.arrival_rate()).expect("positive rate");
                let first = gap.sample(&mut engine.arrivals_rng);
                engine.source = Source::Poisson {
                    gap,
                    batch: w.batch_law().sampler(),
                    service: Exp::new(w.service_rate()).expect("positive rate"),
                };
                engine.schedule_arrival(first, 0);
            }
            Workload::Radio(r) => match r.arrivals() {
                RadioArrivals::PhasedTti => {
                    for cell in 0..r.n_cells() {
                        let phase = engine.arrivals_rng.random::<f64>() * r.tti();
                        engine.schedule_arrival(phase, cell);
                    }
                }
                RadioArrivals::Poisson => {
                    let gap = Exp::new(r.subframe_rate()).expect("positive rate");
                    let first = gap.sample(&mut engine.arrivals_rng);
                    engine.source = Source::Radio { gap: Some(gap) };
                    let cell = engine.arrivals_rng.random_range(0..r.n_cells());
                    engine.schedule_arrival(first, cell);
                }
            },
        }
        engine
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Scheduled {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn schedule_arrival(&mut self, time: f64, source: u32) {
        if time < self.cfg.horizon() {
            self.schedule(time, EventKind::Arrival { source });
        }
    }

    fn capacity(&self) -> f64 {
        f64::from(self.cfg.system().cores())
    }

    /// Accumulate time-weighted statistics over `[warmup, horizon]`.
    fn advance_stats(&mut self, to: f64) {
        let lo = self.last_stat.max(self.cfg.warmup());
        let hi = to.min(self.cfg.horizon());
        if hi > lo {
            let dt = hi - lo;
            let busy = if self.ps.is_some() {
                if self.jobs_in_system > 0 {
                    self.capacity()
                } else {
                    0.0
                }
            } else {
                self.busy_cores as f64
            };
            self.busy_area += busy * dt;
            self.jobs_area += self.jobs_in_system as f64 * dt;
            let n = self.jobs_in_system as usize;
            if n >= self.occupancy_time.len() {
                self.occupancy_time.resize(n + 1, 0.0);
            }
            self.occupancy_time[n] += dt;
        }
        self.last_stat = to;
    }

    pub(crate) fn run(mut self) -> SimMetrics {
        while let Some(ev) = self.events.pop() {
            if let (EventKind::PsTick { epoch }, Some(ps)) = (&ev.kind, &self.ps) {
                // Superseded by a later reschedule; the live tick is queued.
                if *epoch != ps.epoch {
                    continue;
                }
            }
            self.advance_stats(ev.time);
            self.now = ev.time;
            self.audit.events += 1;
            if self.ps.is_some() {
                self.ps_advance();
            }
            match ev.kind {
                EventKind::Arrival { source } => self.on_arrival(source),
                EventKind::Completion { pool, core, token } => {
                    self.on_completion(pool, core, token)
                }
                EventKind::PsTick { epoch } => self.on_ps_tick(epoch),
                EventKind::Deadline { batch } => self.on_deadline(batch),
            }
            if self.ps.is_some() {
                self.ps_reschedule();
            }
            for p in &self.pools {
                if p.queued_live > 0 && !p.free.is_empty() {
                    self.audit.work_conservation_violations += 1;
                }
            }
        }
        self.finish()
    }

    fn finish(self) -> SimMetrics {
        let records = self
            .batches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.observed)
            .map(|(i, b)| BatchRecord {
                batch_id: i as u64,
                arrival_ms: b.arrival,
                sojourn_ms: b.sojourn,
                reneged: b.state == BatchState::Reneged,
            })
            .collect();
        SimMetrics::from_raw(RawMetrics {
            records,
            busy_area: self.busy_area,
            jobs_area: self.jobs_area,
            capacity: self.capacity(),
            occupancy_time: self.occupancy_time,
            jobs_observed: self.jobs_observed,
            job_sojourn_sum: self.job_sojourn_sum,
            offered_load: self.cfg.offered_load(),
            warmup: self.cfg.warmup(),
            horizon: self.cfg.horizon(),
            audit: self.audit,
        })
    }

    fn draw_batch(&mut self) -> Vec<f64> {
        match (&self.source, self.cfg.workload()) {
            (Source::Poisson { batch, service, .. }, _) => {
                let b = batch.sample(&mut self.arrivals_rng);
                (0..b)
                    .map(|_| service.sample(&mut self.service_rng))
                    .collect()
            }
            (Source::Radio { .. }, Workload::Radio(r)) => {
                let tbs = sample_transport_blocks(r, &mut self.arrivals_rng);
                let cost = r.job_cost();
                split_transport_blocks(&tbs, r.parallelism(), r.cb_max_bits())
                    .into_iter()
                    .map(|j| cost.sample(j.bits, &mut self.service_rng))
                    .collect()
            }
            (Source::Radio { .. }, Workload::Poisson(_)) => unreachable!(),
        }
    }

    fn route(&mut self, source: u32) -> u32 {
        let pools = self.pool_weights.len() as u32;
        if pools <= 1 {
            return 0;
        }
        match self.cfg.workload() {
            Workload::Radio(_) => source % pools,
            Workload::Poisson(_) => {
                let u: f64 = self.arrivals_rng.random();
                let mut acc = 0.0;
                for (i, w) in self.pool_weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return i as u32;
                    }
                }
                pools - 1
            }
        }
    }

    fn on_arrival(&mut self, source: u32) {
        let works = self.draw_batch();
        let pool = self.route(source);
        let observed = self.now >= self.cfg.warmup() && self.now < self.cfg.horizon();
        let id = self.batches.len();
        self.batches.push(Batch {
            arrival: self.now,
            remaining: works.len() as u32,
            pool,
            state: BatchState::Open,
            observed,
            sojourn: f64::NAN,
        });
        if observed {
            self.jobs_observed += works.len() as u64;
        }
        self.jobs_in_system += works.len() as u64;

        if let Impatience::BatchDeadline { deadline } = self.cfg.system().impatience() {
            if deadline.is_finite() {
                self.schedule(self.now + deadline, EventKind::Deadline { batch: id });
            }
        }

        if let Some(ps) = self.ps.as_mut() {
            ps.jobs.extend(works.iter().map(|w| PsJob {
                batch: id,
                residual: *w,
            }));
        } else {
            let p = &mut self.pools[pool as usize];
            p.queue.extend(works.iter().map(|w| QueuedJob {
                batch: id,
                work: *w,
            }));
            p.queued_live += works.len() as u64;
            self.dispatch(pool);
        }

        // Next arrival from this source.
        let next = match (&self.source, self.cfg.workload()) {
            (Source::Poisson { gap, .. }, _) => {
                Some((self.now + gap.sample(&mut self.arrivals_rng), 0))
            }
            (Source::Radio { gap: Some(gap) }, Workload::Radio(r)) => {
                let t = self.now + gap.sample(&mut self.arrivals_rng);
                Some((t, self.arrivals_rng.random_range(0..r.n_cells())))
            }
            (Source::Radio { gap: None }, Workload::Radio(r)) => Some((self.now + r.tti(), source)),
            _ => None,
        };
        if let Some((t, s)) = next {
            self.schedule_arrival(t, s);
        }
    }

    /// Start queued jobs on free cores, head of line first.
    fn dispatch(&mut self, pool: u32) {
        loop {
            let p = &mut self.pools[pool as usize];
            if p.free.is_empty() || p.queued_live == 0 {
                return;
            }
            let job = p.queue.pop_front().expect("live job queued");
            if self.batches[job.batch].state != BatchState::Open {
                continue;
            }
            p.queued_live -= 1;
            let core = p.free.pop().expect("free core");
            self.token += 1;
            p.cores[core as usize] = Some(Running {
                batch: job.batch,
                token: self.token,
            });
            self.busy_cores += 1;
            let token = self.token;
            self.schedule(
                self.now + job.work,
                EventKind::Completion { pool, core, token },
            );
        }
    }

    fn job_left(&mut self, batch: usize) {
        self.jobs_in_system -= 1;
        let b = &self.batches[batch];
        if b.observed {
            self.job_sojourn_sum += self.now - b.arrival;
        }
    }

    fn job_done(&mut self, batch: usize) {
        self.job_left(batch);
        let now = self.now;
        let b = &mut self.batches[batch];
        b.remaining -= 1;
        if b.remaining == 0 {
            b.state = BatchState::Done;
            b.sojourn = now - b.arrival;
        }
    }

    fn on_completion(&mut self, pool: u32, core: u32, token: u64) {
        let slot = &mut self.pools[pool as usize].cores[core as usize];
        match *slot {
            Some(r) if r.token == token => {
                *slot = None;
                self.pools[pool as usize].free.push(core);
                self.busy_cores -= 1;
                self.job_done(r.batch);
                self.dispatch(pool);
            }
            // Cancelled by reneging.
            _ => {}
        }
    }

    fn on_deadline(&mut self, batch: usize) {
        if self.batches[batch].state != BatchState::Open {
            return;
        }
        let Impatience::BatchDeadline { deadline } = self.cfg.system().impatience() else {
            return;
        };
        let remaining = self.batches[batch].remaining;
        {
            let b = &mut self.batches[batch];
            b.state = BatchState::Reneged;
            b.sojourn = deadline;
            b.remaining = 0;
        }
        for _ in 0..remaining {
            self.job_left(batch);
        }
        if let Some(ps) = self.ps.as_mut() {
            ps.jobs.retain(|j| j.batch != batch);
            return;
        }
        let pool = self.batches[batch].pool;
        let p = &mut self.pools[pool as usize];
        let mut in_service = 0u64;
        for (core, slot) in p.cores.iter_mut().enumerate() {
            if matches!(slot, Some(r) if r.batch == batch) {
                *slot = None;
                p.free.push(core as u32);
                in_service += 1;
            }
        }
        self.busy_cores -= in_service;
        p.queued_live -= u64::from(remaining) - in_service;
        self.dispatch(pool);
    }

    /// Charge every resident job its equal share of the capacity used since
    /// the last event.
    fn ps_advance(&mut self) {
        let capacity = self.capacity();
        let now = self.now;
        let ps = self.ps.as_mut().expect("processor sharing");
        let n = ps.jobs.len();
        let dt = now - ps.last;
        ps.last = now;
        if n == 0 || dt <= 0.0 {
            return;
        }
        let share = dt * capacity / n as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in &mut ps.jobs {
            let before = j.residual;
            j.residual -= share;
            let got = before - j.residual;
            lo = lo.min(got);
            hi = hi.max(got);
        }
        self.audit.ps_share_max_deviation = self.audit.ps_share_max_deviation.max(hi - lo);
    }

    fn on_ps_tick(&mut self, epoch: u64) {
        let ps = self.ps.as_mut().expect("processor sharing");
        debug_assert_eq!(epoch, ps.epoch);
        if ps.jobs.is_empty() {
            return;
        }
        // The job this tick was scheduled for finishes even if rounding
        // left a sliver of work.
        let argmin = ps
            .jobs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.residual.total_cmp(&b.1.residual))
            .map(|(i, _)| i)
            .expect("nonempty");
        ps.jobs[argmin].residual = 0.0;
        let mut finished = Vec::new();
        ps.jobs.retain(|j| {
            if j.residual <= PS_DONE_EPS {
                finished.push(j.batch);
                false
            } else {
                true
            }
        });
        for b in finished {
            self.job_done(b);
        }
    }

    fn ps_reschedule(&mut self) {
        let capacity = self.capacity();
        let now = self.now;
        let ps = self.ps.as_mut().expect("processor sharing");
        ps.epoch += 1;
        let n = ps.jobs.len();
        if n == 0 {
            return;
        }
        let min = ps
            .jobs
            .iter()
            .map(|j| j.residual)
            .fold(f64::INFINITY, f64::min);
        let epoch = ps.epoch;
        self.schedule(
            now + min.max(0.0) * n as f64 / capacity,
            EventKind::PsTick { epoch },
        );
    }
}
