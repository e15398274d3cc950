// Negated comparisons are how validation rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod dimension;
pub mod error;
pub mod fronthaul;
pub mod model;
pub mod simulate;

pub use error::{Error, Result};
