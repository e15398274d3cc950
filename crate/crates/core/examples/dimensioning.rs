//! Minimal core count for 100 cells with a 2 ms deadline missed at most
//! 0.615% of the time, found by both backends, plus the exceedance curve
//! around the stability threshold.

use crandim::dimension::{exceedance_curve, min_stable_cores, required_cores, Backend};
use crandim::model::{BatchLaw, LatencyTarget, SystemSpec, WorkloadSpec};
use crandim::simulate::SimConfig;

fn main() -> crandim::Result<()> {
    let w = WorkloadSpec::new(100.0, BatchLaw::geometric(0.5)?, 7.8)?;
    let target = LatencyTarget::new(2.0, 0.00615)?;
    let c_s = min_stable_cores(&w);

    let analytic = required_cores(&w, target, &Backend::Analytic, 4 * c_s)?;
    // About 10^6 batches per core count.
    let template = SimConfig::poisson(w.clone(), SystemSpec::greedy(1)?, 11_112.0, 1)?;
    let sim = Backend::Simulation(template);
    let simulated = required_cores(&w, target, &sim, 4 * c_s)?;
    println!("C_s = {c_s}");
    println!(
        "C_r analytic = {}, simulated = {}",
        analytic.c_required, simulated.c_required
    );

    println!("\n   C  simulated exceedance");
    let curve = exceedance_curve(&w, c_s - 4..=c_s + 4, 2.0, &sim)?;
    for p in curve {
        println!(
            "{:4}  {:.6} +- {:.6}{}",
            p.cores,
            p.exceedance,
            p.ci_half_width,
            if p.stable { "" } else { "  (unstable)" }
        );
    }
    Ok(())
}
