//! Numerical solvers for the batch-arrival multi-server queue and the
//! closed forms they reduce to.

mod closed_form;
mod sojourn;
mod stationary;
mod uniformization;

pub use closed_form::{erlang_c, infinite_server_exceedance, mmc_sojourn_tail, ps_mean_sojourn};
pub use sojourn::{batch_sojourn_tail, batch_sojourn_tail_with, SojournTail, TailMethod};
pub use stationary::{
    mxmc_stationary, mxmc_stationary_auto, StationaryDistribution, TAIL_MASS_THRESHOLD,
};
pub use uniformization::PoissonWeights;
