use serde::{Deserialize, Serialize};

use super::stationary::{mxmc_stationary_auto, StationaryDistribution};
use super::uniformization::PoissonWeights;
use crate::error::{invalid, Error, Result};
use crate::model::{offered_load, WorkloadSpec};

/// Poisson mass dropped per uniformization sum.
const POISSON_BUDGET: f64 = 1e-9;
/// Batch sizes with `P(B > r)` below this are folded into `r`.
const BATCH_TAIL_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    PhaseType,
    MonteCarlo,
}

/// Survival function of the batch sojourn time on a time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SojournTail {
    pub grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub method: TailMethod,
}

impl SojournTail {
    /// Survival at `t`, which must be a grid point.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.grid
            .iter()
            .position(|g| *g == t)
            .map(|i| self.survival[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.survival.iter().copied())
    }
}

/// `P(T > t)` for a tagged batch under greedy FCFS, computed exactly up to
/// truncation.
///
/// The batch arrives behind `n` jobs (`n` drawn from the stationary law),
/// carries `b` jobs, and completes when its last job finishes. Later arrivals
/// never overtake it, so the state is just (jobs ahead, own jobs left).
pub fn batch_sojourn_tail(w: &WorkloadSpec, cores: u32, grid: &[f64]) -> Result<SojournTail> {
    let stationary = mxmc_stationary_auto(w, cores)?;
    batch_sojourn_tail_with(w, cores, grid, &stationary)
}

/// [`batch_sojourn_tail`] with a precomputed stationary distribution.
pub fn batch_sojourn_tail_with(
    w: &WorkloadSpec,
    cores: u32,
    grid: &[f64],
    stationary: &StationaryDistribution,
) -> Result<SojournTail> {
    let load = offered_load(w, cores);
    if !load.stable {
        return Err(Error::Unstable { rho: load.rho });
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("sojourn grid points must be finite and >= 0"));
    }
    let uniform_rate = f64::from(cores) * w.service_rate();
    let t_max = grid.iter().copied().fold(0.0, f64::max);
    let steps = PoissonWeights::terms(uniform_rate * t_max, POISSON_BUDGET);
    let surviving = surviving_mass(w, cores, stationary, steps);

    let mut survival: Vec<f64> = grid
        .iter()
        .map(|t| {
            PoissonWeights::new(uniform_rate * t, POISSON_BUDGET)
                .mix(&surviving)
                .clamp(0.0, 1.0)
        })
        .collect();
    // Poisson mixing of a nonincreasing sequence is nonincreasing in t;
    // enforce it against rounding on sorted grids.
    if grid.windows(2).all(|p| p[0] <= p[1]) {
        for i in 1..survival.len() {
            survival[i] = survival[i].min(survival[i - 1]);
        }
    }
    Ok(SojournTail {
        grid: grid.to_vec(),
        survival,
        method: TailMethod::PhaseType,
    })
}

/// Mass of the uniformized chain not yet absorbed after `k` jumps, for
/// `k = 0..steps`.
///
/// Uniformizing at `C mu` makes every jump from a saturated state
/// (`a >= C` jobs ahead) a departure of a job ahead, so a batch arriving
/// behind `n >= C` jobs enters the unsaturated region `a = C - 1` after
/// exactly `n - C + 1` jumps. Only the `C x R` unsaturated states are
/// iterated; saturated arrivals are injected at their entry step.
fn surviving_mass(
    w: &WorkloadSpec,
    cores: u32,
    stationary: &StationaryDistribution,
    steps: usize,
) -> Vec<f64> {
    let c = cores as usize;
    let law = w.batch_law();
    let r_max = law.quantile_cutoff(BATCH_TAIL_CUTOFF).max(1) as usize;
    let mut batch = vec![0.0; r_max + 1];
    for (b, slot) in batch.iter_mut().enumerate().take(r_max).skip(1) {
        *slot = law.pmf(b as u32);
    }
    batch[r_max] = law.tail(r_max as u32 - 1);

    let pi = stationary.probs();
    let idx = |a: usize, r: usize| a * r_max + (r - 1);
    let mut cur = vec![0.0; c * r_max];
    for (n, p) in pi.iter().enumerate().take(c) {
        for r in 1..=r_max {
            cur[idx(n, r)] += p * batch[r];
        }
    }
    // pending[j] = mass injected at step j >= 1, i.e. pi[C - 1 + j].
    let pending = |j: usize| pi.get(c - 1 + j).copied().unwrap_or(0.0);
    let mut not_injected: f64 = pi.iter().skip(c).sum();

    let cf = c as f64;
    let mut out = Vec::with_capacity(steps);
    let mut next = vec![0.0; cur.len()];
    for k in 0..steps {
        out.push(cur.iter().sum::<f64>() + not_injected);
        if k + 1 == steps {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for a in 0..c {
            let serving_own_max = c - a;
            for r in 1..=r_max {
                let m = cur[idx(a, r)];
                if m == 0.0 {
                    continue;
                }
                let own = r.min(serving_own_max) as f64;
                let p_ahead = a as f64 / cf;
                let p_own = own / cf;
                if a > 0 {
                    next[idx(a - 1, r)] += m * p_ahead;
                }
                if r > 1 {
                    next[idx(a, r - 1)] += m * p_own;
                }
                next[idx(a, r)] += m * (1.0 - p_ahead - p_own);
            }
        }
        let inject = pending(k + 1);
        if inject > 0.0 {
            for r in 1..=r_max {
                next[idx(c - 1, r)] += inject * batch[r];
            }
            not_injected = (not_injected - inject).max(0.0);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    out
}
