//! 100 cells sharing 151 cores: subframe, per-UE and per-code-block jobs
//! fed from one seed.

use crandim::model::{BatchLaw, JobCost, Parallelism, RadioWorkload, SystemSpec, TbSizeLaw};
use crandim::simulate::{run_radio, SimConfig};

fn main() -> crandim::Result<()> {
    let radio = RadioWorkload::builder(
        100,
        BatchLaw::geometric(2.0 / 3.0)?,
        TbSizeLaw::Uniform {
            min: 1000,
            max: 40000,
        },
        JobCost {
            ms_per_kbit: 0.0147,
            overhead_ms: 0.0,
        },
    )
    .build()?;
    let cfg = SimConfig::radio(radio, SystemSpec::greedy(151)?, 2_000.0, 1)?;
    println!("offered load {:.3}", cfg.offered_load());
    let out = run_radio(&cfg, &Parallelism::ALL)?;
    let base = out[0].1.p99;
    for (mode, m) in &out {
        println!(
            "{:>9}: mean {:.3} ms, p99 {:.3} ms (gain {:.3} ms), jobs/batch {:.2}",
            mode.as_str(),
            m.mean_sojourn,
            m.p99,
            base - m.p99,
            m.jobs_observed as f64 / m.batches_observed as f64
        );
    }
    Ok(())
}
