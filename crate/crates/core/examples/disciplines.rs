//! The same batch stream served greedily from one pool, by processor
//! sharing, and by two dedicated half pools.

use crandim::model::{BatchLaw, Discipline, Impatience, SystemSpec, WorkloadSpec};
use crandim::simulate::{run, SimConfig};

fn main() -> crandim::Result<()> {
    let w = WorkloadSpec::new(1.5, BatchLaw::geometric(0.5)?, 1.0)?;
    let systems = [
        ("greedy fcfs", Discipline::GreedyFcfs),
        ("processor sharing", Discipline::ProcessorSharing),
        (
            "dedicated 2+2",
            Discipline::Dedicated {
                partition: vec![2, 2],
            },
        ),
    ];
    println!("rho = 0.75, 4 cores");
    for (name, d) in systems {
        let sys = SystemSpec::new(4, d, Impatience::None)?;
        let m = run(&SimConfig::poisson(w.clone(), sys, 100_000.0, 42)?);
        let e = m.exceedance(4.0);
        println!(
            "{name:>18}: mean {:.3}, p99 {:.3}, P(T >= 4) = {:.4} +- {:.4}, utilization {:.3}",
            m.mean_sojourn, m.p99, e.value, e.half_width, m.core_utilization
        );
    }
    Ok(())
}
