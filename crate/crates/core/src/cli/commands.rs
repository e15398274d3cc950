use std::fs;
use std::io::Write;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    AnalyzeConfig, BackendChoice, DimensionConfig, FronthaulConfig, SimSettings, SimulateConfig,
    SweepConfig,
};
use super::output::{Meta, OutputDir};
use super::{BackendFlag, Cli, CliError, Format, Outcome, EXIT_NOT_FOUND};
use crate::analytic::{batch_sojourn_tail_with, mxmc_stationary, mxmc_stationary_auto};
use crate::dimension::{
    default_c_max, exceedance_at, min_stable_cores, required_cores_with, Backend,
    DimensioningResult, ScanStrategy,
};
use crate::error::Error;
use crate::fronthaul::{aggregation_report, latency_to_distance, AggregationReport};
use crate::model::{offered_load, BatchLaw, Discipline, OfferedLoad, Parallelism, WorkloadSpec};
use crate::simulate::{self, ReplicatedSummary, SimConfig, SimSummary, Workload};

/// Parse the config file as `T`, keeping the raw JSON for hashing.
fn load<T: DeserializeOwned>(cli: &Cli) -> Result<(T, Value), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::invalid("--config <path> is required for this command"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::json(path, &e))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| CliError::json(path, &e))?;
    Ok((cfg, raw))
}

fn meta(cli: &Cli, raw: &Value, seed: Option<u64>) -> Meta {
    let effective = json!({
        "command": cli.command.name(),
        "config": raw,
        "seed": cli.seed,
        "replications": cli.replications,
        "backend": cli.backend,
        "format": cli.format,
    });
    Meta::new(cli.command.name(), &effective, seed)
}

fn no_backend_flag(cli: &Cli) -> Result<(), CliError> {
    match cli.backend {
        Some(_) => Err(CliError::invalid(format!(
            "--backend does not apply to {}",
            cli.command.name()
        ))),
        None => Ok(()),
    }
}

fn choose_backend(cli: &Cli, from_config: Option<BackendChoice>) -> BackendChoice {
    match cli.backend {
        Some(BackendFlag::Analytic) => BackendChoice::Analytic,
        Some(BackendFlag::Sim) => BackendChoice::Sim,
        None => from_config.unwrap_or(BackendChoice::Analytic),
    }
}

fn build_backend(
    choice: BackendChoice,
    settings: Option<&SimSettings>,
    w: &WorkloadSpec,
    seed: u64,
    replications: Option<u32>,
) -> Result<Backend, CliError> {
    match choice {
        BackendChoice::Analytic => Ok(Backend::Analytic),
        BackendChoice::Sim => {
            let s = settings.ok_or_else(|| {
                CliError::invalid("the sim backend needs a \"simulation\" section")
            })?;
            Ok(Backend::Simulation(s.template(
                w,
                seed,
                replications.unwrap_or(s.replications),
            )?))
        }
    }
}

fn finish(out: OutputDir, stdout: String) -> Outcome {
    Outcome {
        written: out.written().to_vec(),
        stdout,
    }
}

#[derive(Serialize)]
struct StationarySummary {
    truncation: usize,
    tail_mass_bound: f64,
    balance_residual: f64,
    mean_jobs: f64,
}

#[derive(Serialize)]
struct Exceedance {
    deadline: f64,
    probability: f64,
}

#[derive(Serialize)]
struct AnalyzeSummary {
    workload: WorkloadSpec,
    cores: u32,
    offered_load: OfferedLoad,
    c_stability: u32,
    stationary: StationarySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    exceedance: Option<Exceedance>,
}

pub(super) fn analyze(cli: &Cli) -> Result<Outcome, CliError> {
    no_backend_flag(cli)?;
    let (cfg, raw) = load::<AnalyzeConfig>(cli)?;
    if !(cfg.t_max.is_finite() && cfg.t_max > 0.0) || cfg.points < 2 {
        return Err(CliError::invalid("t_max must be > 0 and points >= 2"));
    }
    let w = &cfg.workload;
    let load = offered_load(w, cfg.cores);
    if !load.stable {
        return Err(Error::Unstable { rho: load.rho }.into());
    }
    let stationary = match cfg.truncation {
        Some(n) => mxmc_stationary(w, cfg.cores, n)?,
        None => mxmc_stationary_auto(w, cfg.cores)?,
    };
    let step = cfg.t_max / (cfg.points - 1) as f64;
    let grid: Vec<f64> = (0..cfg.points).map(|i| i as f64 * step).collect();
    let tail = batch_sojourn_tail_with(w, cfg.cores, &grid, &stationary)?;
    let exceedance = match cfg.deadline {
        Some(d) => Some(Exceedance {
            deadline: d,
            probability: batch_sojourn_tail_with(w, cfg.cores, &[d], &stationary)?.survival[0],
        }),
        None => None,
    };

    let mut out = OutputDir::new(&cli.out, meta(cli, &raw, None));
    out.write_csv("tail.csv", |f| {
        writeln!(f, "t,survival")?;
        for (t, s) in tail.iter() {
            writeln!(f, "{t},{s}")?;
        }
        Ok(())
    })?;
    out.write_csv("stationary.csv", |f| {
        writeln!(f, "n,prob")?;
        for (n, p) in stationary.probs().iter().enumerate() {
            writeln!(f, "{n},{p}")?;
        }
        Ok(())
    })?;
    if cli.format == Format::Json {
        out.write_json(
            "analyze.json",
            &AnalyzeSummary {
                workload: w.clone(),
                cores: cfg.cores,
                offered_load: load,
                c_stability: min_stable_cores(w),
                stationary: StationarySummary {
                    truncation: stationary.truncation(),
                    tail_mass_bound: stationary.tail_mass_bound(),
                    balance_residual: stationary.balance_residual(),
                    mean_jobs: stationary.mean(),
                },
                exceedance,
            },
        )?;
    }
    Ok(finish(out, String::new()))
}

#[derive(Serialize)]
struct ModeResult {
    mode: String,
    #[serde(flatten)]
    summary: SimSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    replicated: Option<ReplicatedSummary>,
}

#[derive(Serialize)]
struct SimulateSummary {
    offered_load: f64,
    replications: u32,
    runs: Vec<ModeResult>,
}

fn discipline_label(d: &Discipline) -> &'static str {
    match d {
        Discipline::GreedyFcfs => "greedy_fcfs",
        Discipline::ProcessorSharing => "processor_sharing",
        Discipline::Dedicated { .. } => "dedicated",
    }
}

pub(super) fn simulate(cli: &Cli) -> Result<Outcome, CliError> {
    no_backend_flag(cli)?;
    let (cfg, raw) = load::<SimulateConfig>(cli)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let replications = cli.replications.unwrap_or(cfg.replications);
    let sim = cfg.sim_config(seed, replications)?;
    if cfg.deadlines.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(CliError::invalid("deadlines must be finite and > 0"));
    }
    let rho = sim.offered_load();
    if rho >= 1.0 && !cfg.allow_unstable {
        return Err(Error::Unstable { rho }.into());
    }

    let variants: Vec<(String, SimConfig)> = match sim.workload() {
        Workload::Poisson(_) => {
            if cfg.modes.is_some() {
                return Err(CliError::invalid(
                    "\"modes\" applies to radio workloads only",
                ));
            }
            vec![(
                discipline_label(sim.system().discipline()).to_string(),
                sim.clone(),
            )]
        }
        Workload::Radio(r) => {
            let modes = cfg
                .modes
                .clone()
                .unwrap_or_else(|| Parallelism::ALL.to_vec());
            if modes.is_empty() {
                return Err(CliError::invalid("\"modes\" must not be empty"));
            }
            modes
                .iter()
                .map(|m| {
                    let c = sim
                        .clone()
                        .with_workload(Workload::Radio(r.with_parallelism(*m)));
                    (m.as_str().to_string(), c)
                })
                .collect()
        }
    };

    let results: Vec<(String, simulate::SimMetrics, Option<ReplicatedSummary>)> = variants
        .par_iter()
        .map(|(label, c)| {
            if replications >= 2 {
                let rep = simulate::replicate(c)?;
                let summary = rep.summary(&cfg.deadlines);
                Ok((label.clone(), rep.runs()[0].clone(), Some(summary)))
            } else {
                Ok((label.clone(), simulate::run(c), None))
            }
        })
        .collect::<Result<_, Error>>()?;

    let mut out = OutputDir::new(&cli.out, meta(cli, &raw, Some(seed)));
    out.write_csv("cdf.csv", |f| {
        writeln!(f, "mode,t,F")?;
        for (label, m, _) in &results {
            for (t, p) in m.cdf_points(cfg.cdf_points) {
                writeln!(f, "{label},{t},{p}")?;
            }
        }
        Ok(())
    })?;
    if cfg.samples {
        for (label, m, _) in &results {
            let name = if results.len() == 1 {
                "samples.csv".to_string()
            } else {
                format!("samples_{label}.csv")
            };
            out.write_csv(&name, |f| m.write_samples_csv(f))?;
        }
    }
    let mut stdout = String::new();
    for (label, m, _) in &results {
        stdout.push_str(&format!(
            "{label}: {} batches, mean sojourn {:.6} ms, p99 {:.6} ms, utilization {:.4}\n",
            m.batches_observed, m.mean_sojourn, m.p99, m.core_utilization
        ));
    }
    if cli.format == Format::Json {
        let runs = results
            .into_iter()
            .map(|(mode, m, replicated)| ModeResult {
                mode,
                summary: m.summary(&cfg.deadlines, cfg.cdf_points),
                replicated,
            })
            .collect();
        out.write_json(
            "simulate.json",
            &SimulateSummary {
                offered_load: rho,
                replications,
                runs,
            },
        )?;
    }
    Ok(finish(out, stdout))
}

#[derive(Serialize)]
struct DimensionSummary {
    c_max: u32,
    strategy: ScanStrategy,
    #[serde(flatten)]
    result: DimensioningResult,
}

pub(super) fn dimension(cli: &Cli) -> Result<Outcome, CliError> {
    let (cfg, raw) = load::<DimensionConfig>(cli)?;
    let choice = choose_backend(cli, cfg.backend);
    let seed = cli.seed.unwrap_or(cfg.seed);
    let w = &cfg.workload;
    let backend = build_backend(choice, cfg.simulation.as_ref(), w, seed, cli.replications)?;
    let c_max = cfg.c_max.unwrap_or_else(|| default_c_max(w));
    let result =
        required_cores_with(w, cfg.target, &backend, c_max, cfg.strategy).map_err(|e| match e {
            // C_max below the stability threshold is a C_max problem too.
            Error::Unstable { .. } => CliError {
                code: EXIT_NOT_FOUND,
                kind: "c_max_insufficient",
                message: format!(
                    "{e}; c_max = {c_max} is below C_s = {}",
                    min_stable_cores(w)
                ),
                line: None,
                column: None,
            },
            e => e.into(),
        })?;

    let seed_meta = (choice == BackendChoice::Sim).then_some(seed);
    let mut out = OutputDir::new(&cli.out, meta(cli, &raw, seed_meta));
    out.write_csv("curve.csv", |f| result.write_curve_csv(f))?;
    let stdout = format!(
        "C_s = {}, C_r = {}\n",
        result.c_stability, result.c_required
    );
    if cli.format == Format::Json {
        out.write_json(
            "dimension.json",
            &DimensionSummary {
                c_max,
                strategy: cfg.strategy,
                result,
            },
        )?;
    }
    Ok(finish(out, stdout))
}

#[derive(Serialize)]
struct FronthaulSummary<'a> {
    report: &'a AggregationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    latency_budget_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_distance_km: Option<f64>,
}

pub(super) fn fronthaul(cli: &Cli) -> Result<Outcome, CliError> {
    no_backend_flag(cli)?;
    let (cfg, raw) = match cli.config {
        Some(_) => load::<FronthaulConfig>(cli)?,
        None => (FronthaulConfig::default(), json!({})),
    };
    let report = aggregation_report(cfg.n_cells, &cfg.spec, cfg.load_factor)?;
    let distance = cfg
        .latency_budget_ms
        .map(|b| latency_to_distance(b, cfg.spec.fiber_speed_mps))
        .transpose()?;

    let mut out = OutputDir::new(&cli.out, meta(cli, &raw, None));
    out.write_csv("fronthaul.csv", |f| {
        writeln!(f, "rate,per_cell_bps,total_bps")?;
        let (one, all) = (&report.per_cell, &report.total);
        writeln!(f, "cpri,{},{}", one.cpri_bps, all.cpri_bps)?;
        writeln!(
            f,
            "split6_dl_peak,{},{}",
            one.split6_dl_peak_bps, all.split6_dl_peak_bps
        )?;
        writeln!(
            f,
            "split6_ul_peak,{},{}",
            one.split6_ul_peak_bps, all.split6_ul_peak_bps
        )?;
        writeln!(
            f,
            "split6_dl_average,{},{}",
            one.split6_dl_average_bps, all.split6_dl_average_bps
        )?;
        writeln!(
            f,
            "split6_ul_average,{},{}",
            one.split6_ul_average_bps, all.split6_ul_average_bps
        )?;
        Ok(())
    })?;
    let mut stdout = format!("{report}\n");
    if let (Some(b), Some(d)) = (cfg.latency_budget_ms, distance) {
        stdout.push_str(&format!(
            "{b} ms of one-way latency covers {d:.2} km of fiber\n"
        ));
    }
    if cli.format == Format::Json {
        out.write_json(
            "fronthaul.json",
            &FronthaulSummary {
                report: &report,
                latency_budget_ms: cfg.latency_budget_ms,
                max_distance_km: distance,
            },
        )?;
    }
    Ok(finish(out, stdout))
}

pub const SWEEP_FIELDS: [&str; 5] = ["cores", "q", "arrival_rate", "service_rate", "deadline"];

#[derive(Debug, Clone, Copy, Serialize)]
struct SweepRow {
    value: f64,
    cores: u32,
    rho: f64,
    stable: bool,
    exceedance: f64,
    ci_half_width: f64,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    field: &'a str,
    deadline: f64,
    rows: &'a [SweepRow],
}

fn sweep_point(cfg: &SweepConfig, value: f64, backend: &Backend) -> Result<SweepRow, CliError> {
    let mut w = cfg.workload.clone();
    let mut cores = cfg.cores;
    let mut deadline = cfg.deadline;
    match cfg.field.as_str() {
        "cores" => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                return Err(CliError::invalid(format!(
                    "core counts must be positive integers, got {value}"
                )));
            }
            cores = value as u32;
        }
        "q" => {
            if !matches!(w.batch_law(), BatchLaw::Geometric { .. }) {
                return Err(Error::NotGeometric.into());
            }
            w = w.with_batch_law(BatchLaw::geometric(value)?)?;
        }
        "arrival_rate" => w = w.with_arrival_rate(value)?,
        "service_rate" => w = w.with_service_rate(value)?,
        "deadline" => deadline = value,
        other => return Err(unknown_field(other)),
    }
    let p = exceedance_at(&w, cores, deadline, backend)?;
    Ok(SweepRow {
        value,
        cores,
        rho: offered_load(&w, cores).rho,
        stable: p.stable,
        exceedance: p.exceedance,
        ci_half_width: p.ci_half_width,
    })
}

fn unknown_field(name: &str) -> CliError {
    CliError::invalid(format!(
        "unknown sweep field {name:?}; expected one of {}",
        SWEEP_FIELDS.join(", ")
    ))
}

pub(super) fn sweep(cli: &Cli) -> Result<Outcome, CliError> {
    let (cfg, raw) = load::<SweepConfig>(cli)?;
    if !SWEEP_FIELDS.contains(&cfg.field.as_str()) {
        return Err(unknown_field(&cfg.field));
    }
    if !(cfg.deadline.is_finite() && cfg.deadline > 0.0) {
        return Err(CliError::invalid("deadline must be finite and > 0"));
    }
    let values = match (&cfg.values, &cfg.range) {
        (Some(v), None) => v.clone(),
        (None, Some(r)) => {
            if !(r.step > 0.0 && r.to >= r.from) {
                return Err(CliError::invalid("range needs step > 0 and to >= from"));
            }
            r.values()
        }
        _ => {
            return Err(CliError::invalid(
                "give exactly one of \"values\" and \"range\"",
            ))
        }
    };
    if values.is_empty() {
        return Err(CliError::invalid("the sweep has no values"));
    }
    let choice = choose_backend(cli, cfg.backend);
    let seed = cli.seed.unwrap_or(cfg.seed);
    let backend = build_backend(
        choice,
        cfg.simulation.as_ref(),
        &cfg.workload,
        seed,
        cli.replications,
    )?;

    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|v| sweep_point(&cfg, *v, &backend))
        .collect::<Result<_, _>>()?;

    let seed_meta = (choice == BackendChoice::Sim).then_some(seed);
    let mut out = OutputDir::new(&cli.out, meta(cli, &raw, seed_meta));
    out.write_csv("sweep.csv", |f| {
        writeln!(f, "# field: {}", cfg.field)?;
        writeln!(f, "value,cores,rho,stable,exceedance,ci_half_width")?;
        for r in &rows {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                r.value, r.cores, r.rho, r.stable, r.exceedance, r.ci_half_width
            )?;
        }
        Ok(())
    })?;
    if cli.format == Format::Json {
        out.write_json(
            "sweep.json",
            &SweepSummary {
                field: &cfg.field,
                deadline: cfg.deadline,
                rows: &rows,
            },
        )?;
    }
    Ok(finish(out, String::new()))
}
