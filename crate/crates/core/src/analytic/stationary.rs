use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{offered_load, BatchLaw, WorkloadSpec};

/// Largest stationary mass tolerated beyond 90% of the truncation level.
pub const TAIL_MASS_THRESHOLD: f64 = 1e-8;

const MAX_TRUNCATION: usize = 1 << 24;
const RESCALE_ABOVE: f64 = 1e200;

/// Stationary law of the number of jobs in the truncated batch queue.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
    truncation: usize,
    tail_mass_bound: f64,
    balance_residual: f64,
}

impl StationaryDistribution {
    /// `probs()[n]` is the probability of `n` jobs in system, `n = 0..=N`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Mass on states above `0.9 N`.
    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    /// `max_n |(pi Q)_n|` on the truncated generator.
    pub fn balance_residual(&self) -> f64 {
        self.balance_residual
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// `P(N >= n)`.
    pub fn tail_from(&self, n: usize) -> f64 {
        self.probs.iter().skip(n).sum()
    }
}

/// Jump structure of the arrival process, chosen for O(N) or O(N K) sweeps.
enum Kernel {
    Geometric {
        q: f64,
    },
    /// `pmf[k] = P(B = k)` and `tail[k] = P(B > k)` for `k = 0..=K`.
    Bounded {
        pmf: Vec<f64>,
        tail: Vec<f64>,
    },
}

impl Kernel {
    fn new(law: &BatchLaw) -> Self {
        match (law, law.max_support()) {
            (BatchLaw::Geometric { q }, None) => Kernel::Geometric { q: *q },
            (_, Some(k)) => Kernel::Bounded {
                pmf: (0..=k).map(|i| law.pmf(i)).collect(),
                tail: (0..=k).map(|i| law.tail(i)).collect(),
            },
            (_, None) => unreachable!("only geometric laws have unbounded support"),
        }
    }
}

/// Stationary distribution of the M^X/M/C queue on `{0, .., n_trunc}`.
///
/// Arrivals that would overshoot `n_trunc` are absorbed at `n_trunc`, which
/// keeps the generator conservative. The chain only moves down one level at
/// a time, so equating flows across each cut `{<= m} | {> m}` gives `pi`
/// level by level without a linear solve.
pub fn mxmc_stationary(
    w: &WorkloadSpec,
    cores: u32,
    n_trunc: usize,
) -> Result<StationaryDistribution> {
    let load = offered_load(w, cores);
    if !load.stable {
        return Err(Error::Unstable { rho: load.rho });
    }
    let min_trunc = 10 * cores as usize;
    if n_trunc < min_trunc {
        return Err(invalid(format!(
            "truncation {n_trunc} below the minimum 10 C = {min_trunc}"
        )));
    }
    let dist = solve(w, cores, n_trunc);
    if dist.tail_mass_bound >= TAIL_MASS_THRESHOLD {
        return Err(Error::Truncation {
            truncation: n_trunc,
            tail_mass: dist.tail_mass_bound,
            threshold: TAIL_MASS_THRESHOLD,
        });
    }
    Ok(dist)
}

/// Like [`mxmc_stationary`], choosing the truncation level automatically:
/// start at `max(10 C, 50 E[B] / (1 - rho))` and double until the tail mass
/// bound is met.
pub fn mxmc_stationary_auto(w: &WorkloadSpec, cores: u32) -> Result<StationaryDistribution> {
    let load = offered_load(w, cores);
    if !load.stable {
        return Err(Error::Unstable { rho: load.rho });
    }
    let start = (50.0 * w.batch_law().mean() / (1.0 - load.rho)).ceil();
    let mut n = (10 * cores as usize).max(start.min(MAX_TRUNCATION as f64) as usize);
    loop {
        let dist = solve(w, cores, n);
        if dist.tail_mass_bound < TAIL_MASS_THRESHOLD {
            return Ok(dist);
        }
        if n >= MAX_TRUNCATION {
            return Err(Error::Truncation {
                truncation: n,
                tail_mass: dist.tail_mass_bound,
                threshold: TAIL_MASS_THRESHOLD,
            });
        }
        n = (2 * n).min(MAX_TRUNCATION);
    }
}

fn solve(w: &WorkloadSpec, cores: u32, n: usize) -> StationaryDistribution {
    let lambda = w.arrival_rate();
    let mu = w.service_rate();
    let kernel = Kernel::new(w.batch_law());
    let death = |m: usize| m.min(cores as usize) as f64 * mu;

    let mut pi = vec![0.0; n + 1];
    pi[0] = 1.0;
    // Geometric: running sum_{j <= m} pi_j q^(m - j).
    let mut running = 0.0;
    for m in 0..n {
        let up = match &kernel {
            Kernel::Geometric { q } => {
                running = q * running + pi[m];
                lambda * running
            }
            Kernel::Bounded { tail, .. } => {
                let k = tail.len() - 1;
                let lo = (m + 1).saturating_sub(k);
                lambda * (lo..=m).map(|j| pi[j] * tail[m - j]).sum::<f64>()
            }
        };
        pi[m + 1] = up / death(m + 1);
        if pi[m + 1] > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            pi[..=m + 1].iter_mut().for_each(|p| *p *= s);
            running *= s;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);

    let cutoff = (0.9 * n as f64).floor() as usize;
    let tail_mass_bound = pi.iter().skip(cutoff + 1).sum();
    let balance_residual = residual(&pi, &kernel, lambda, &death);
    StationaryDistribution {
        probs: pi,
        truncation: n,
        tail_mass_bound,
        balance_residual,
    }
}

fn residual(pi: &[f64], kernel: &Kernel, lambda: f64, death: &dyn Fn(usize) -> f64) -> f64 {
    let n = pi.len() - 1;
    let mut worst: f64 = 0.0;
    // Geometric: sum_{j < m} pi_j q^(m - 1 - j).
    let mut running = 0.0;
    for m in 0..=n {
        let arrivals_in = match kernel {
            Kernel::Geometric { q } => {
                let inflow = if m == n { running } else { (1.0 - q) * running };
                running = q * running + pi[m];
                lambda * inflow
            }
            Kernel::Bounded { pmf, tail } => {
                let k = pmf.len() - 1;
                let lo = m.saturating_sub(k);
                if m == n {
                    // Overshooting jumps land on n: P(B >= n - j) = tail[n - j - 1].
                    lambda * (lo..m).map(|j| pi[j] * tail[m - j - 1]).sum::<f64>()
                } else {
                    lambda * (lo..m).map(|j| pi[j] * pmf[m - j]).sum::<f64>()
                }
            }
        };
        let departures_in = if m < n { pi[m + 1] * death(m + 1) } else { 0.0 };
        let out = pi[m] * (if m < n { lambda } else { 0.0 } + death(m));
        worst = worst.max((arrivals_in + departures_in - out).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mmc_birth_death(c: u32, lambda: f64, mu: f64, n: usize) -> Vec<f64> {
        let mut p = vec![1.0];
        for m in 1..=n {
            let prev = p[m - 1];
            p.push(prev * lambda / (m.min(c as usize) as f64 * mu));
        }
        let s: f64 = p.iter().sum();
        p.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn unit_batches_reduce_to_birth_death() {
        for (c, lambda) in [(1, 0.5), (2, 1.4), (8, 7.0)] {
            let w = WorkloadSpec::new(lambda, BatchLaw::deterministic(1).unwrap(), 1.0).unwrap();
            let d = mxmc_stationary_auto(&w, c).unwrap();
            let bd = mmc_birth_death(c, lambda, 1.0, d.truncation());
            for (a, b) in d.probs().iter().zip(&bd) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn geometric_unit_batch_uses_same_law() {
        let w1 = WorkloadSpec::new(0.7, BatchLaw::geometric(0.0).unwrap(), 1.0).unwrap();
        let w2 = WorkloadSpec::new(0.7, BatchLaw::deterministic(1).unwrap(), 1.0).unwrap();
        let a = mxmc_stationary(&w1, 1, 400).unwrap();
        let b = mxmc_stationary(&w2, 1, 400).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn global_balance_residual_small() {
        let laws = [
            BatchLaw::geometric(0.5).unwrap(),
            BatchLaw::deterministic(3).unwrap(),
            BatchLaw::empirical([(1, 0.5), (2, 0.2), (6, 0.3)]).unwrap(),
        ];
        for law in laws {
            for c in [1, 4, 16] {
                let w =
                    WorkloadSpec::new(0.8 * f64::from(c) / law.mean(), law.clone(), 1.0).unwrap();
                let d = mxmc_stationary_auto(&w, c).unwrap();
                assert!(
                    d.balance_residual() < 1e-9,
                    "{law:?} c={c}: {}",
                    d.balance_residual()
                );
                assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!(d.tail_mass_bound() < TAIL_MASS_THRESHOLD);
            }
        }
    }

    #[test]
    fn large_pool_does_not_overflow() {
        let w = WorkloadSpec::new(100.0, BatchLaw::geometric(0.8).unwrap(), 1.0).unwrap();
        let d = mxmc_stationary_auto(&w, 600).unwrap();
        assert!(d.probs().iter().all(|p| p.is_finite()));
        assert!(d.balance_residual() < 1e-9);
    }

    #[test]
    fn errors() {
        let w = WorkloadSpec::new(1.0, BatchLaw::geometric(0.5).unwrap(), 1.0).unwrap();
        assert!(matches!(
            mxmc_stationary(&w, 2, 100),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(
            mxmc_stationary(&w, 4, 20),
            Err(Error::InvalidParameter(_))
        ));
        // rho = 0.5 with mean batch 2 needs far more than 40 levels
        assert!(matches!(
            mxmc_stationary(&w, 4, 40),
            Err(Error::Truncation { .. })
        ));
    }
}
