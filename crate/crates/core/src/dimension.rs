//! Core-count dimensioning: the smallest pool meeting `P(T > deadline) < tolerance`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{batch_sojourn_tail, infinite_server_exceedance};
use crate::error::{invalid, Error, Result};
use crate::model::{offered_load, Discipline, LatencyTarget, WorkloadSpec};
use crate::simulate::{self, SimConfig, Workload};

/// Points evaluated together during a linear scan. Fixed so that results do
/// not depend on the thread count.
const SCAN_CHUNK: u32 = 8;

/// How exceedance probabilities are obtained.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Exact phase-type tail of the greedy FCFS queue.
    Analytic,
    /// Simulation of `template` with its core count overridden. The decision
    /// uses the upper end of the 95% interval.
    Simulation(SimConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Analytic,
    Simulation,
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Analytic => BackendKind::Analytic,
            Backend::Simulation(_) => BackendKind::Simulation,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStrategy {
    /// Every `C` from `C_s` upward.
    #[default]
    Linear,
    /// Doubling steps until feasible, then bisection. Assumes exceedance is
    /// monotone in `C`.
    Galloping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub cores: u32,
    pub exceedance: f64,
    pub ci_half_width: f64,
    pub stable: bool,
}

impl CurvePoint {
    /// Value compared against the tolerance.
    pub fn decision_value(&self) -> f64 {
        self.exceedance + self.ci_half_width
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensioningResult {
    pub c_required: u32,
    pub c_stability: u32,
    pub curve: Vec<CurvePoint>,
    pub backend: BackendKind,
    pub target: LatencyTarget,
}

impl DimensioningResult {
    /// CSV with columns `C,exceedance,ci_half_width`.
    pub fn write_curve_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_curve_csv(&self.curve, out)
    }
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "C,exceedance,ci_half_width")?;
    for p in curve {
        writeln!(out, "{},{},{}", p.cores, p.exceedance, p.ci_half_width)?;
    }
    Ok(())
}

/// Smallest core count with `rho < 1`: `floor(lambda E[B] / mu) + 1`.
pub fn min_stable_cores(w: &WorkloadSpec) -> u32 {
    let mut c = w.offered_erlangs().floor() as u32 + 1;
    // Guard against rounding at integral loads.
    while !offered_load(w, c).stable {
        c += 1;
    }
    c
}

/// `4 C_s`.
pub fn default_c_max(w: &WorkloadSpec) -> u32 {
    4 * min_stable_cores(w)
}

/// Exceedance `P(T > deadline)` at a single core count.
///
/// Unstable counts report exceedance 1 with the analytic backend (the
/// sojourn time grows without bound) and whatever the finite-horizon run
/// measured with the simulation backend.
pub fn exceedance_at(
    w: &WorkloadSpec,
    cores: u32,
    deadline: f64,
    backend: &Backend,
) -> Result<CurvePoint> {
    let stable = offered_load(w, cores).stable;
    match backend {
        Backend::Analytic => {
            if !stable {
                return Ok(CurvePoint {
                    cores,
                    exceedance: 1.0,
                    ci_half_width: 0.0,
                    stable,
                });
            }
            let tail = batch_sojourn_tail(w, cores, &[deadline])?;
            Ok(CurvePoint {
                cores,
                exceedance: tail.survival[0],
                ci_half_width: 0.0,
                stable,
            })
        }
        Backend::Simulation(template) => {
            let cfg = sim_config_for(template, w, cores)?;
            let est = if cfg.replications() >= 2 {
                simulate::replicate(&cfg)?.exceedance(deadline)
            } else {
                simulate::run(&cfg).exceedance(deadline)
            };
            let half = if est.half_width.is_finite() {
                est.half_width
            } else {
                0.0
            };
            Ok(CurvePoint {
                cores,
                exceedance: if est.value.is_finite() {
                    est.value
                } else {
                    1.0
                },
                ci_half_width: half,
                stable,
            })
        }
    }
}

fn sim_config_for(template: &SimConfig, w: &WorkloadSpec, cores: u32) -> Result<SimConfig> {
    if matches!(template.system().discipline(), Discipline::Dedicated { .. }) {
        return Err(invalid(
            "dimensioning rescales the pool; dedicated partitions are not supported",
        ));
    }
    Ok(template
        .clone()
        .with_workload(Workload::Poisson(w.clone()))
        .with_system(template.system().with_cores(cores)?))
}

/// Exceedance for every core count in `cores`, evaluated in parallel.
pub fn exceedance_curve(
    w: &WorkloadSpec,
    cores: impl IntoIterator<Item = u32>,
    deadline: f64,
    backend: &Backend,
) -> Result<Vec<CurvePoint>> {
    let cs: Vec<u32> = cores.into_iter().collect();
    cs.par_iter()
        .map(|c| exceedance_at(w, *c, deadline, backend))
        .collect()
}

/// First core count from `C_s` upward achieving `P(T > deadline) < tolerance`.
pub fn required_cores(
    w: &WorkloadSpec,
    target: LatencyTarget,
    backend: &Backend,
    c_max: u32,
) -> Result<DimensioningResult> {
    required_cores_with(w, target, backend, c_max, ScanStrategy::Linear)
}

pub fn required_cores_with(
    w: &WorkloadSpec,
    target: LatencyTarget,
    backend: &Backend,
    c_max: u32,
    strategy: ScanStrategy,
) -> Result<DimensioningResult> {
    let c_s = min_stable_cores(w);
    if c_max < c_s {
        return Err(Error::Unstable {
            rho: offered_load(w, c_max).rho,
        });
    }
    // No pool beats unlimited cores, so skip a scan that cannot succeed.
    let floor = infinite_server_exceedance(w, target.deadline());
    if floor >= target.tolerance() {
        return Err(Error::NotFound {
            c_max,
            last_exceedance: floor,
        });
    }
    let meets = |p: &CurvePoint| p.decision_value() < target.tolerance();
    let eval = |c| exceedance_at(w, c, target.deadline(), backend);

    let mut curve: Vec<CurvePoint> = Vec::new();
    let found = match strategy {
        ScanStrategy::Linear => {
            let mut found = None;
            let mut lo = c_s;
            while found.is_none() && lo <= c_max {
                let hi = (lo + SCAN_CHUNK - 1).min(c_max);
                let chunk = exceedance_curve(w, lo..=hi, target.deadline(), backend)?;
                for p in chunk {
                    curve.push(p);
                    if meets(&p) {
                        found = Some(p.cores);
                        break;
                    }
                }
                lo = hi + 1;
            }
            found
        }
        ScanStrategy::Galloping => {
            let mut bad = None;
            let mut step = 1;
            let mut c = c_s;
            let mut good = None;
            loop {
                let p = eval(c)?;
                curve.push(p);
                if meets(&p) {
                    good = Some(c);
                    break;
                }
                bad = Some(c);
                if c == c_max {
                    break;
                }
                c = (c + step).min(c_max);
                step *= 2;
            }
            if let (Some(mut lo), Some(mut hi)) = (bad, good) {
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    let p = eval(mid)?;
                    curve.push(p);
                    if meets(&p) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                good = Some(hi);
            }
            curve.sort_by_key(|p| p.cores);
            good
        }
    };

    match found {
        Some(c_required) => Ok(DimensioningResult {
            c_required,
            c_stability: c_s,
            curve,
            backend: backend.kind(),
            target,
        }),
        None => Err(Error::NotFound {
            c_max,
            last_exceedance: curve.last().map_or(f64::NAN, |p| p.exceedance),
        }),
    }
}
