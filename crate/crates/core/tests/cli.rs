use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crandim::analytic::mmc_sojourn_tail;
use crandim::dimension::min_stable_cores;
use crandim::model::{BatchLaw, WorkloadSpec};
use serde_json::Value;
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/configs")
        .join(name)
}

fn crandim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crandim"))
        .args(args)
        .env("CRANDIM_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn run_ok(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = crandim(&args);
    assert!(
        o.status.success(),
        "{cmd}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// Data rows of a CSV, comment lines and header removed.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn diagnostic(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stderr)
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line}"))
}

#[test]
fn analyze_unit_batches_match_closed_form() {
    let dir = TempDir::new().unwrap();
    run_ok("analyze", &config("analyze_mm2.json"), dir.path(), &[]);
    let rows = csv_rows(&dir.path().join("tail.csv"));
    assert_eq!(rows.len(), 41);
    for r in rows {
        let t: f64 = r[0].parse().unwrap();
        let s: f64 = r[1].parse().unwrap();
        assert!(
            (s - mmc_sojourn_tail(2, 1.4, 1.0, t).unwrap()).abs() < 1e-6,
            "t={t}"
        );
    }
    let probs: f64 = csv_rows(&dir.path().join("stationary.csv"))
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .sum();
    assert!((probs - 1.0).abs() < 1e-9);
    let summary = json(&dir.path().join("analyze.json"));
    assert_eq!(summary["meta"]["tool"], "crandim");
    assert_eq!(summary["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["meta"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn csv_outputs_carry_header_block() {
    let dir = TempDir::new().unwrap();
    run_ok(
        "analyze",
        &config("analyze_mm2.json"),
        dir.path(),
        &["--format", "csv"],
    );
    let text = fs::read_to_string(dir.path().join("tail.csv")).unwrap();
    assert!(text.contains("# version: "));
    assert!(text.contains("# config_sha256: "));
    assert!(!dir.path().join("analyze.json").exists());
}

#[test]
fn malformed_json_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        "{\n  \"cores\": 2,\n  \"t_max\": ,\n}",
    );
    let o = crandim(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let d = diagnostic(&o);
    assert_eq!(d["kind"], "malformed_json");
    assert_eq!(d["line"], 3);
    assert!(d["column"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(config("analyze_mm2.json"))
        .unwrap()
        .replacen('{', "{\"colour\": 1,", 1);
    let cfg = write_config(dir.path(), "extra.json", &body);
    let o = crandim(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(diagnostic(&o)["message"]
        .as_str()
        .unwrap()
        .contains("colour"));
}

#[test]
fn unstable_and_truncation_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let unstable = write_config(
        dir.path(),
        "unstable.json",
        r#"{"workload": {"arrival_rate": 2.4, "batch_law": {"deterministic": {"k": 1}}, "service_rate": 1.0},
            "cores": 2, "t_max": 5}"#,
    );
    let o = crandim(&[
        "analyze",
        "--config",
        unstable.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(diagnostic(&o)["kind"], "unstable");

    let short = write_config(
        dir.path(),
        "short.json",
        r#"{"workload": {"arrival_rate": 0.95, "batch_law": {"geometric": {"q": 0.5}}, "service_rate": 1.0},
            "cores": 2, "t_max": 5, "truncation": 20}"#,
    );
    let o = crandim(&["analyze", "--config", short.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(diagnostic(&o)["kind"], "truncation");
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_ok("simulate", &config("simulate_radio.json"), a.path(), &[]);
    run_ok("simulate", &config("simulate_radio.json"), b.path(), &[]);
    for name in ["cdf.csv", "simulate.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let c = TempDir::new().unwrap();
    run_ok(
        "simulate",
        &config("simulate_radio.json"),
        c.path(),
        &["--seed", "2"],
    );
    assert_ne!(
        fs::read(a.path().join("cdf.csv")).unwrap(),
        fs::read(c.path().join("cdf.csv")).unwrap()
    );
}

#[test]
fn simulate_radio_writes_three_cdf_series() {
    let dir = TempDir::new().unwrap();
    run_ok("simulate", &config("simulate_radio.json"), dir.path(), &[]);
    let text = fs::read_to_string(dir.path().join("cdf.csv")).unwrap();
    assert!(text.lines().any(|l| l == "mode,t,F"));
    let rows = csv_rows(&dir.path().join("cdf.csv"));
    for mode in ["subframe", "per_ue", "per_cb"] {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == mode)
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert_eq!(series.len(), 200, "{mode}");
        assert!(series.windows(2).all(|p| p[1] >= p[0]));
    }
    let summary = json(&dir.path().join("simulate.json"));
    assert_eq!(summary["meta"]["seed"], 1);
    let e = &summary["runs"][0]["exceedance"][0];
    assert!(e["half_width"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_poisson_with_samples_and_replications() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(config("simulate_poisson.json"))
        .unwrap()
        .replacen('{', "{\"samples\": true,", 1);
    let cfg = write_config(dir.path(), "cfg.json", &body);
    run_ok("simulate", &cfg, dir.path(), &["--replications", "3"]);
    let text = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(text
        .lines()
        .any(|l| l == "batch_id,arrival_ms,sojourn_ms,reneged"));
    let summary = json(&dir.path().join("simulate.json"));
    assert_eq!(summary["replications"], 3);
    assert_eq!(summary["runs"][0]["replicated"]["replications"], 3);
}

#[test]
fn simulate_rejects_unstable_unless_allowed() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(config("simulate_poisson.json"))
        .unwrap()
        .replace("\"cores\": 4", "\"cores\": 1");
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let o = crandim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let allowed = write_config(
        dir.path(),
        "allowed.json",
        &body.replacen('{', "{\"allow_unstable\": true,", 1),
    );
    run_ok("simulate", &allowed, dir.path(), &[]);
    assert_eq!(
        json(&dir.path().join("simulate.json"))["runs"][0]["unstable"],
        true
    );
}

#[test]
fn dimension_toy_and_curve_format() {
    let dir = TempDir::new().unwrap();
    run_ok("dimension", &config("dimension_toy.json"), dir.path(), &[]);
    assert_eq!(json(&dir.path().join("dimension.json"))["c_required"], 1);

    let cal = TempDir::new().unwrap();
    run_ok(
        "dimension",
        &config("dimension_calibration.json"),
        cal.path(),
        &[],
    );
    let result = json(&cal.path().join("dimension.json"));
    assert_eq!(result["c_required"], 27);
    let text = fs::read_to_string(cal.path().join("curve.csv")).unwrap();
    assert!(text.lines().any(|l| l == "C,exceedance,ci_half_width"));
    let cs: Vec<u32> = csv_rows(&cal.path().join("curve.csv"))
        .iter()
        .map(|r| r[0].parse().unwrap())
        .collect();
    assert!(cs.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn dimension_backends_agree_through_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "cross.json",
        r#"{"workload": {"arrival_rate": 1.5, "batch_law": {"deterministic": {"k": 1}}, "service_rate": 1.0},
            "target": {"deadline": 6.0, "tolerance": 0.01},
            "simulation": {"horizon": 300000.0}, "seed": 4}"#,
    );
    let a = dir.path().join("a");
    let s = dir.path().join("s");
    run_ok("dimension", &cfg, &a, &["--backend", "analytic"]);
    run_ok("dimension", &cfg, &s, &["--backend", "sim"]);
    let ra = json(&a.join("dimension.json"));
    let rs = json(&s.join("dimension.json"));
    assert_eq!(ra["c_required"], 3);
    assert_eq!(rs["c_required"], 3);
    assert_eq!(rs["backend"], "simulation");
    assert_eq!(rs["meta"]["seed"], 4);
    assert!(ra["meta"].get("seed").is_none());
}

#[test]
fn dimension_c_max_too_small() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(config("dimension_calibration.json"))
        .unwrap()
        .replacen('{', "{\"c_max\": 26,", 1);
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let o = crandim(&[
        "dimension",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    let below = write_config(
        dir.path(),
        "below.json",
        &body.replace("\"c_max\": 26", "\"c_max\": 20"),
    );
    let o = crandim(&[
        "dimension",
        "--config",
        below.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(diagnostic(&o)["kind"], "c_max_insufficient");
}

#[test]
fn fronthaul_default_has_downlink_anchor() {
    let dir = TempDir::new().unwrap();
    let o = crandim(&["fronthaul", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("100.800"));
    let rows = csv_rows(&dir.path().join("fronthaul.csv"));
    let dl = rows.iter().find(|r| r[0] == "split6_dl_peak").unwrap();
    assert_eq!(dl[1].parse::<f64>().unwrap(), 100.8e6);
    let cpri = rows.iter().find(|r| r[0] == "cpri").unwrap();
    assert!((cpri[1].parse::<f64>().unwrap() - 1.2288e9).abs() < 1.0);

    run_ok(
        "fronthaul",
        &config("fronthaul_100_cells.json"),
        dir.path(),
        &[],
    );
    let report = json(&dir.path().join("fronthaul.json"));
    assert!((report["max_distance_km"].as_f64().unwrap() - 254.25).abs() < 1e-9);
    assert!((report["report"]["total"]["cpri_bps"].as_f64().unwrap() - 122.88e9).abs() < 1.0);
}

#[test]
fn sweep_cores_from_stability_threshold() {
    let dir = TempDir::new().unwrap();
    let w = WorkloadSpec::new(100.0, BatchLaw::geometric(0.5).unwrap(), 7.8).unwrap();
    assert_eq!(min_stable_cores(&w), 26);
    run_ok("sweep", &config("sweep_cores.json"), dir.path(), &[]);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 51);
    let e: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(e.windows(2).all(|p| p[1] <= p[0]));
}

#[test]
fn sweep_q_is_monotone() {
    let dir = TempDir::new().unwrap();
    run_ok("sweep", &config("sweep_q.json"), dir.path(), &[]);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 7);
    let e: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(e.windows(2).all(|p| p[1] >= p[0]), "{e:?}");
}

#[test]
fn sweep_unknown_field() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(config("sweep_q.json"))
        .unwrap()
        .replace("\"field\": \"q\"", "\"field\": \"colour\"");
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let o = crandim(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_idempotent() {
    for (cmd, cfg) in [
        ("analyze", "analyze_geometric.json"),
        ("dimension", "dimension_calibration.json"),
        ("sweep", "sweep_q.json"),
        ("fronthaul", "fronthaul_100_cells.json"),
    ] {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        run_ok(cmd, &config(cfg), a.path(), &[]);
        run_ok(cmd, &config(cfg), b.path(), &[]);
        for entry in fs::read_dir(a.path()).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{cmd} {name:?}"
            );
        }
    }
}

#[test]
fn bad_worker_count_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_crandim"))
        .args([
            "fronthaul",
            "--out",
            TempDir::new().unwrap().path().to_str().unwrap(),
        ])
        .env("CRANDIM_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
