//! Independent replications on disjoint random streams, and the interval
//! they give for the mean sojourn time.

use crandim::analytic::ps_mean_sojourn;
use crandim::model::{BatchLaw, Discipline, Impatience, SystemSpec, WorkloadSpec};
use crandim::simulate::{replicate, SimConfig};

fn main() -> crandim::Result<()> {
    let w = WorkloadSpec::new(0.9, BatchLaw::deterministic(1)?, 1.0)?;
    let sys = SystemSpec::new(1, Discipline::ProcessorSharing, Impatience::None)?;
    let cfg = SimConfig::poisson(w, sys, 50_000.0, 2024)?.with_replications(16)?;
    let reps = replicate(&cfg)?;
    let mean = reps.mean_sojourn();
    println!(
        "M/M/1-PS at rho 0.9: {:.3} in [{:.3}, {:.3}], exact {:.3}",
        mean.value,
        mean.lower(),
        mean.upper(),
        ps_mean_sojourn(0.9, 1.0)?
    );
    for (i, m) in reps.runs().iter().take(4).enumerate() {
        println!(
            "  replication {i}: {} batches, mean {:.3}",
            m.batches_observed, m.mean_sojourn
        );
    }
    Ok(())
}
