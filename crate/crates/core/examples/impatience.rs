//! Batches that give up at their deadline, against the patient system.

use crandim::model::{BatchLaw, Impatience, SystemSpec, WorkloadSpec};
use crandim::simulate::{run, run_impatient, SimConfig};

fn main() -> crandim::Result<()> {
    let w = WorkloadSpec::new(1.0, BatchLaw::geometric(0.5)?, 1.0)?;
    for deadline in [2.0, 4.0, 6.0, 8.0] {
        let patient = SimConfig::poisson(w.clone(), SystemSpec::greedy(4)?, 200_000.0, 9)?;
        let impatient = patient.clone().with_system(
            patient
                .system()
                .with_impatience(Impatience::BatchDeadline { deadline })?,
        );
        let p = run(&patient).exceedance(deadline);
        let m = run_impatient(&impatient)?;
        println!(
            "deadline {deadline}: patient P(T >= d) = {:.5} +- {:.5}, reneged {:.5}, utilization {:.3} vs {:.3}",
            p.value,
            p.half_width,
            m.reneged_fraction,
            m.core_utilization,
            run(&patient).core_utilization
        );
    }
    Ok(())
}
