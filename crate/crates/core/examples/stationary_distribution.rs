//! Number of jobs in a batch-arrival pool, with truncation diagnostics.

use crandim::analytic::{erlang_c, mxmc_stationary_auto};
use crandim::model::{offered_load, BatchLaw, WorkloadSpec};

fn main() -> crandim::Result<()> {
    for q in [0.0, 0.3, 0.6] {
        let mean_batch = 1.0 / (1.0 - q);
        let w = WorkloadSpec::new(6.4 / mean_batch, BatchLaw::geometric(q)?, 1.0)?;
        let d = mxmc_stationary_auto(&w, 8)?;
        println!(
            "q = {q}: rho = {:.2}, E[N] = {:.4}, P(N >= 8) = {:.4}, N_trunc = {}, tail mass {:.1e}, residual {:.1e}",
            offered_load(&w, 8).rho,
            d.mean(),
            d.tail_from(8),
            d.truncation(),
            d.tail_mass_bound(),
            d.balance_residual()
        );
    }
    // Unit batches: P(N >= C) is the Erlang-C waiting probability.
    println!("Erlang C(8, 6.4) = {:.4}", erlang_c(8, 6.4)?);
    Ok(())
}
