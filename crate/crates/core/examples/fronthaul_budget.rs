//! CPRI against the intra-PHY split for a 100-cell pool, and how far the
//! pool can sit from its antennas.

use crandim::fronthaul::{aggregation_report, latency_to_distance, FronthaulSpec};

fn main() -> crandim::Result<()> {
    let spec = FronthaulSpec::lte(20.0)?;
    let report = aggregation_report(100, &spec, 0.6)?;
    println!("{report}\n");

    for antennas in [1, 2, 4] {
        let r = aggregation_report(1, &spec.with_antennas(antennas), 1.0)?;
        println!(
            "{antennas} antenna(s): cpri {:.1} Mbps, split dl {:.1} Mbps",
            r.per_cell.cpri_bps / 1e6,
            r.per_cell.split6_dl_peak_bps / 1e6
        );
    }

    let budget_ms = 1.13;
    let km = latency_to_distance(budget_ms, spec.fiber_speed_mps)?;
    println!("\n{budget_ms} ms of processing slack buys {km:.2} km of fiber");
    Ok(())
}
