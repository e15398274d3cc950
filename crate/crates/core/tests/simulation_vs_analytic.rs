//! The simulator against exact results across batch laws, pool sizes and
//! loads, plus its behavior on unstable configurations.

use crandim::analytic::{batch_sojourn_tail, mxmc_stationary_auto};
use crandim::dimension::min_stable_cores;
use crandim::model::{BatchLaw, SystemSpec, WorkloadSpec};
use crandim::simulate::{run, SimConfig};

fn workload(q: f64, cores: u32, rho: f64) -> WorkloadSpec {
    let mean_b = 1.0 / (1.0 - q);
    WorkloadSpec::new(
        rho * f64::from(cores) / mean_b,
        BatchLaw::geometric(q).unwrap(),
        1.0,
    )
    .unwrap()
}

/// Times at which the exact tail crosses 0.5, 0.1 and 0.01.
fn crossing_times(w: &WorkloadSpec, cores: u32) -> Vec<f64> {
    let grid: Vec<f64> = (0..=4000).map(|i| f64::from(i) * 0.01).collect();
    let tail = batch_sojourn_tail(w, cores, &grid).unwrap();
    [0.5, 0.1, 0.01]
        .iter()
        .filter_map(|level| tail.iter().find(|(_, s)| s <= level).map(|(t, _)| t))
        .collect()
}

#[test]
fn exceedance_agrees_over_grid() {
    // 81 comparisons, so the bound is 4 standard errors.
    let mut worst: f64 = 0.0;
    for q in [0.0, 0.3, 0.6] {
        for cores in [1u32, 2, 8] {
            for rho in [0.3, 0.7, 0.9] {
                let w = workload(q, cores, rho);
                let batches = 200_000.0;
                let horizon = batches / w.arrival_rate() / 0.9;
                let cfg =
                    SimConfig::poisson(w.clone(), SystemSpec::greedy(cores).unwrap(), horizon, 17)
                        .unwrap();
                let m = run(&cfg);
                let ts = crossing_times(&w, cores);
                let exact = batch_sojourn_tail(&w, cores, &ts).unwrap();
                for (t, s) in exact.iter() {
                    let z = m.exceedance(t).z_score(s);
                    worst = worst.max(z);
                    assert!(
                        z < 4.0,
                        "q={q} C={cores} rho={rho} t={t}: sim {:?} exact {s}",
                        m.exceedance(t)
                    );
                }
                let little = m.little_law_gap(m.job_arrival_rate);
                assert!(little < 0.02, "Little gap {little}");
                assert!((m.core_utilization - rho).abs() / rho < 0.02);
                assert_eq!(m.audit.work_conservation_violations, 0);
            }
        }
    }
    println!("largest z-score {worst:.2}");
}

#[test]
fn occupancy_matches_stationary_law() {
    let w = workload(0.5, 4, 0.7);
    let horizon = 300_000.0 / w.arrival_rate();
    let m =
        run(&SimConfig::poisson(w.clone(), SystemSpec::greedy(4).unwrap(), horizon, 5).unwrap());
    let exact = mxmc_stationary_auto(&w, 4).unwrap();
    let sim = m.occupancy_distribution();
    let n = exact.probs().len().max(sim.len());
    let tv: f64 = (0..n)
        .map(|i| (exact.probs().get(i).unwrap_or(&0.0) - sim.get(i).unwrap_or(&0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.01, "total variation {tv}");
    assert!((m.mean_jobs_in_system - exact.mean()).abs() / exact.mean() < 0.03);
}

#[test]
fn unstable_exceedance_grows_with_horizon() {
    let w = WorkloadSpec::new(1.2, BatchLaw::geometric(0.5).unwrap(), 1.0).unwrap();
    let c = min_stable_cores(&w) - 1;
    let deadline = 50.0;
    let mut prev = 0.0;
    let mut prev_mean = 0.0;
    for horizon in [500.0, 5_000.0, 50_000.0] {
        let cfg =
            SimConfig::poisson(w.clone(), SystemSpec::greedy(c).unwrap(), horizon, 3).unwrap();
        let m = run(&cfg);
        assert!(m.unstable);
        let e = m.exceedance(deadline).value;
        assert!(e >= prev, "horizon {horizon}: {e} < {prev}");
        // The backlog grows linearly, so sojourns scale with the horizon.
        assert!(
            m.mean_sojourn > 5.0 * prev_mean,
            "horizon {horizon}: {} vs {prev_mean}",
            m.mean_sojourn
        );
        prev = e;
        prev_mean = m.mean_sojourn;
    }
    assert!(prev > 0.9, "{prev}");
}
