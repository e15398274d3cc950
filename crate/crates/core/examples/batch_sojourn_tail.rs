//! Sojourn-time tail of a batch: unit batches against the M/M/C closed form,
//! then heavier geometric batches at the same load.

use crandim::analytic::{batch_sojourn_tail, mmc_sojourn_tail};
use crandim::model::{BatchLaw, WorkloadSpec};

fn main() -> crandim::Result<()> {
    let grid: Vec<f64> = (0..=8).map(f64::from).collect();
    let unit = WorkloadSpec::new(1.4, BatchLaw::deterministic(1)?, 1.0)?;
    let tail = batch_sojourn_tail(&unit, 2, &grid)?;
    println!("   t  phase-type   closed form");
    for (t, s) in tail.iter() {
        println!("{t:4}  {s:.8}  {:.8}", mmc_sojourn_tail(2, 1.4, 1.0, t)?);
    }

    println!("\n   t  q=0.3      q=0.6      (C = 4, rho = 0.7)");
    let tails: Vec<_> = [0.3, 0.6]
        .iter()
        .map(|q| {
            let w = WorkloadSpec::new(2.8 * (1.0 - q), BatchLaw::geometric(*q)?, 1.0)?;
            batch_sojourn_tail(&w, 4, &grid)
        })
        .collect::<crandim::Result<_>>()?;
    for (i, t) in grid.iter().enumerate() {
        println!(
            "{t:4}  {:.6}   {:.6}",
            tails[0].survival[i], tails[1].survival[i]
        );
    }
    Ok(())
}
