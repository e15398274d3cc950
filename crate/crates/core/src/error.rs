use thiserror::Error;

/// Errors raised by the model, solvers and dimensioning search.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable system: offered load rho = {rho:.6} >= 1")]
    Unstable { rho: f64 },

    #[error(
        "truncation failure: tail mass {tail_mass:.3e} at N = {truncation} exceeds {threshold:.0e}"
    )]
    Truncation {
        truncation: usize,
        tail_mass: f64,
        threshold: f64,
    },

    /// `last_exceedance` is a value no core count up to `c_max` gets below.
    #[error("no core count up to {c_max} meets the target; exceedance stays at or above {last_exceedance:.6}")]
    NotFound { c_max: u32, last_exceedance: f64 },

    #[error("operation requires a geometric batch law")]
    NotGeometric,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
