//! Subcommand implementations. Each returns a process exit code:
//! `0` success, `1` runtime/condition failure (gain condition unmet,
//! simulation abort), `2` validation or I/O error.

use std::path::{Path, PathBuf};

use aerowrench_core::params::{Config, ObserverGains};
use aerowrench_core::scenario::{scenario_by_name, ScenarioSpec};
use aerowrench_core::sim::{
    compute_metrics, run_scenario_with, EstimatorSelection, MetricsReport, RunLog, RunOptions,
};
use aerowrench_core::stability::stability_report;
use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::csvlog;
use crate::params_doc::load_config;
use crate::report;

/// Exit code for a core error: validation problems are usage errors (2),
/// everything else is a runtime failure (1).
fn exit_code_for(err: &aerowrench_core::Error) -> i32 {
    use aerowrench_core::Error::*;
    match err {
        InvalidParams(_) | InvalidScenario(_) | EmptyMetricsWindow { .. } => 2,
        _ => 1,
    }
}

/// Common settings shared by the run-like commands.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub params: Option<PathBuf>,
    pub scenario: String,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub estimators: EstimatorSelection,
    pub dt_control: Option<f64>,
}

/// Resolves a scenario argument: built-in name first, then a JSON file path.
pub fn load_scenario(arg: &str) -> Result<ScenarioSpec> {
    if let Some(spec) = scenario_by_name(arg) {
        return Ok(spec);
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!(
            "unknown scenario '{arg}': not a built-in name and no such file (built-ins: {})",
            aerowrench_core::scenario::reference_scenarios()
                .iter()
                .map(|s| s.name.clone())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    let spec: ScenarioSpec = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse scenario file {}", path.display()))?;
    Ok(spec)
}

fn prepare(settings: &RunSettings) -> Result<(ScenarioSpec, Config)> {
    let config = load_config(settings.params.as_deref())?;
    let mut spec = load_scenario(&settings.scenario)?;
    if let Some(seed) = settings.seed {
        spec.seed = seed;
    }
    if let Some(dt) = settings.dt_control {
        spec.dt_control = dt;
    }
    Ok((spec, config))
}

fn write_outputs(
    out_dir: &Path,
    log: &RunLog,
    metrics: &MetricsReport,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{}.csv", log.scenario));
    csvlog::write_csv(log, &csv_path)?;
    let json_path = out_dir.join(format!("{}_metrics.json", log.scenario));
    let json = serde_json::to_string_pretty(metrics)?;
    std::fs::write(&json_path, json)
        .with_context(|| format!("cannot write {}", json_path.display()))?;
    Ok((csv_path, json_path))
}

/// `run`: execute one scenario, write the CSV log and metrics JSON, print
/// the metrics table.
pub fn cmd_run(settings: &RunSettings) -> Result<i32> {
    let (spec, config) = prepare(settings)?;
    let options = RunOptions {
        estimators: settings.estimators,
        ..RunOptions::default()
    };
    let log = match run_scenario_with(&spec, &config, &options) {
        Ok(log) => log,
        Err(e) => {
            eprintln!("run aborted: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let metrics = match compute_metrics(&log, spec.t_skip) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("metrics failed: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let (csv_path, json_path) = write_outputs(&settings.out, &log, &metrics)?;
    print!("{}", report::metrics_table(&metrics));
    println!("log:     {}", csv_path.display());
    println!("metrics: {}", json_path.display());
    if !log.gain_condition_met {
        eprintln!("warning: observer gain condition not met over the configured envelope");
    }
    Ok(0)
}

/// `verify`: print the stability certificate; exit 0 iff the gain condition
/// holds over the configured envelope.
pub fn cmd_verify(params: Option<&Path>) -> Result<i32> {
    let config = load_config(params)?;
    let report = match stability_report(&config.system, &config.envelope, &config.observer) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verification failed: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    print!("{}", report::stability_text(&report));
    Ok(if report.gain_condition_met { 0 } else { 1 })
}

/// `compare`: run both estimators on one scenario and print the side-by-side
/// table with RMSE ratios; optionally write outputs.
pub fn cmd_compare(settings: &RunSettings, write: bool) -> Result<i32> {
    let (spec, config) = prepare(settings)?;
    let options = RunOptions {
        estimators: EstimatorSelection {
            agno: true,
            ekf: true,
        },
        ..RunOptions::default()
    };
    let log = match run_scenario_with(&spec, &config, &options) {
        Ok(log) => log,
        Err(e) => {
            eprintln!("run aborted: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let metrics =
        compute_metrics(&log, spec.t_skip).map_err(|e| anyhow::anyhow!("metrics failed: {e}"))?;
    print!("{}", report::metrics_table(&metrics));
    if let Some(line) = report::ratio_line(&metrics) {
        println!("{line}");
    }
    if write {
        let (csv_path, json_path) = write_outputs(&settings.out, &log, &metrics)?;
        println!("log:     {}", csv_path.display());
        println!("metrics: {}", json_path.display());
    }
    Ok(0)
}

/// Cartesian sweep grid over observer gains and a noise scale.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub k0: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Parses a grid such as `k0=0.39,0.78,1.56;k1=0.3;noise=0,1`.
pub fn parse_grid(text: &str, defaults: &ObserverGains) -> Result<GridSpec> {
    let mut grid = GridSpec {
        k0: vec![defaults.k0],
        k1: vec![defaults.k1],
        k2: vec![defaults.k2],
        noise: vec![1.0],
    };
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, values) = part
            .split_once('=')
            .with_context(|| format!("grid entry '{part}' is not key=v1,v2,..."))?;
        let parsed: Vec<f64> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad grid value '{v}' for '{key}'"))
            })
            .collect::<Result<_>>()?;
        if parsed.is_empty() {
            bail!("grid key '{key}' has no values");
        }
        match key.trim() {
            "k0" => grid.k0 = parsed,
            "k1" => grid.k1 = parsed,
            "k2" => grid.k2 = parsed,
            "noise" => grid.noise = parsed,
            other => bail!("unknown grid key '{other}' (use k0, k1, k2, noise)"),
        }
    }
    Ok(grid)
}

/// One sweep result row.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub noise_scale: f64,
    /// Observer RMSE per channel over the standard metrics window.
    pub rmse: [f64; 6],
    /// Observer RMSE per channel over the last quarter of the run
    /// (steady-state window for the noise-floor trade-off).
    pub rmse_ss: [f64; 6],
}

/// `sweep`: run the scenario per grid point in a parallel worker pool and
/// emit a CSV of RMSE versus gains; rows are sorted by grid key so the
/// output is order-independent.
pub fn cmd_sweep(settings: &RunSettings, grid_text: Option<&str>) -> Result<i32> {
    let Some(grid_text) = grid_text else {
        eprintln!("sweep requires --grid (e.g. --grid \"k0=0.39,0.78,1.56;noise=0,1\")");
        return Ok(2);
    };
    let (spec, config) = prepare(settings)?;
    let grid = match parse_grid(grid_text, &config.observer) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("invalid grid: {e}");
            return Ok(2);
        }
    };

    let mut points = Vec::new();
    for &k0 in &grid.k0 {
        for &k1 in &grid.k1 {
            for &k2 in &grid.k2 {
                for &noise in &grid.noise {
                    points.push((k0, k1, k2, noise));
                }
            }
        }
    }
    if points.is_empty() {
        eprintln!("empty sweep grid");
        return Ok(2);
    }

    let results: Vec<Result<SweepRow, aerowrench_core::Error>> = points
        .par_iter()
        .map(|&(k0, k1, k2, noise)| {
            let mut point_config = config;
            point_config.observer = ObserverGains {
                k0,
                k1,
                k2,
                mode: config.observer.mode,
            };
            let mut point_spec = spec.clone();
            point_spec.noise = spec.noise.scaled(noise);
            let options = RunOptions {
                estimators: EstimatorSelection {
                    agno: true,
                    ekf: false,
                },
                ..RunOptions::default()
            };
            let log = run_scenario_with(&point_spec, &point_config, &options)?;
            let metrics = compute_metrics(&log, point_spec.t_skip)?;
            let steady = compute_metrics(&log, 0.75 * point_spec.duration)?;
            Ok(SweepRow {
                k0,
                k1,
                k2,
                noise_scale: noise,
                rmse: metrics.agno.expect("observer enabled").rmse,
                rmse_ss: steady.agno.expect("observer enabled").rmse,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("sweep point failed: {e}");
                return Ok(exit_code_for(&e));
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.k0, a.k1, a.k2, a.noise_scale)
            .partial_cmp(&(b.k0, b.k1, b.k2, b.noise_scale))
            .unwrap()
    });

    std::fs::create_dir_all(&settings.out)?;
    let path = settings.out.join(format!("{}_sweep.csv", spec.name));
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut cols = vec![
        "k0".to_string(),
        "k1".to_string(),
        "k2".to_string(),
        "noise_scale".to_string(),
    ];
    let names = ["fx", "fy", "fz", "tx", "ty", "tz"];
    cols.extend(names.iter().map(|n| format!("rmse_{n}")));
    cols.extend(names.iter().map(|n| format!("rmse_ss_{n}")));
    w.write_record(&cols)?;
    for row in &rows {
        let mut fields = vec![
            format!("{:.8e}", row.k0),
            format!("{:.8e}", row.k1),
            format!("{:.8e}", row.k2),
            format!("{:.8e}", row.noise_scale),
        ];
        fields.extend(row.rmse.iter().map(|v| format!("{v:.8e}")));
        fields.extend(row.rmse_ss.iter().map(|v| format!("{v:.8e}")));
        w.write_record(&fields)?;
    }
    w.flush()?;
    println!(
        "sweep of {} points written to {}",
        rows.len(),
        path.display()
    );
    Ok(0)
}
