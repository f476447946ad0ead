//! Seeded repetitions, aggregation, artifact files and parameter sweeps.
//!
//! Output layout of one experiment:
//!
//! ```text
//! out/summary.json        config, aggregate statistics, every run row
//! out/runs.csv            one row per run
//! out/run_<i>/metrics.csv step,dd,total_energy,lost
//! out/run_<i>/trace.txt   interaction trace (when traces are enabled)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::metrics_to_csv;
use crate::sim::{run_single, RunOutcome, RunRow};

pub const RUNS_HEADER: &str = "run_index,seed,formation_steps,estimation_steps,tau,converged,ed,ed_percent,loss_percent";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    /// Mean and sample standard deviation; the deviation of one value is 0.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: f64::NAN, stddev: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, stddev }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub converged_fraction: f64,
    pub formation_steps: Stat,
    pub estimation_steps: Stat,
    pub tau: Stat,
    pub ed: Stat,
    pub ed_percent: Stat,
    pub loss_percent: Stat,
}

impl Aggregate {
    pub fn from_rows(rows: &[RunRow]) -> Aggregate {
        let col = |f: fn(&RunRow) -> f64| Stat::of(&rows.iter().map(f).collect::<Vec<_>>());
        Aggregate {
            runs: rows.len(),
            converged_fraction: rows.iter().filter(|r| r.converged).count() as f64 / rows.len().max(1) as f64,
            formation_steps: col(|r| r.formation_steps as f64),
            estimation_steps: col(|r| r.estimation_steps as f64),
            tau: col(|r| r.tau as f64),
            ed: col(|r| r.ed),
            ed_percent: col(|r| r.ed_percent),
            loss_percent: col(|r| r.loss_percent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub aggregate: Aggregate,
    pub runs: Vec<RunRow>,
}

impl ExperimentSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

pub fn runs_to_csv(rows: &[RunRow]) -> String {
    let mut out = String::new();
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.run_index,
            r.seed,
            r.formation_steps,
            r.estimation_steps,
            r.tau,
            r.converged,
            r.ed,
            r.ed_percent,
            r.loss_percent
        );
    }
    out
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RUNS_HEADER => {}
        _ => return Err(Error::parse(1, "missing runs header")),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::parse(i + 1, format!("bad row {line:?}"));
            if f.len() != 9 {
                return Err(bad());
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad());
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(RunRow {
                run_index: int(f[0])?,
                seed: int(f[1])?,
                formation_steps: int(f[2])?,
                estimation_steps: int(f[3])?,
                tau: int(f[4])?,
                converged: f[5].parse().map_err(|_| bad())?,
                ed: real(f[6])?,
                ed_percent: real(f[7])?,
                loss_percent: real(f[8])?,
            })
        })
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_run_files(dir: &Path, out: &RunOutcome) -> Result<()> {
    let run_dir = dir.join(format!("run_{}", out.row.run_index));
    fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    if !out.metrics.is_empty() {
        write(&run_dir.join("metrics.csv"), &metrics_to_csv(&out.metrics))?;
    }
    if let Some(trace) = &out.trace {
        write(&run_dir.join("trace.txt"), &trace.to_text())?;
    }
    Ok(())
}

/// Runs every repetition (in parallel) and, with `out_dir`, writes the
/// artifact files.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentSummary> {
    cfg.validate()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let rows = (0..cfg.repetitions as u64)
        .into_par_iter()
        .map(|i| {
            let out = run_single(cfg, i)?;
            if let Some(dir) = out_dir {
                write_run_files(dir, &out)?;
            }
            Ok(out.row)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = ExperimentSummary {
        config: cfg.clone(),
        aggregate: Aggregate::from_rows(&rows),
        runs: rows,
    };
    if let Some(dir) = out_dir {
        write(&dir.join("summary.json"), &summary.to_json())?;
        write(&dir.join("runs.csv"), &runs_to_csv(&summary.runs))?;
    }
    Ok(summary)
}

/// A base configuration plus a grid of values per (dotted) field path, e.g.
/// `"energy_protocol.lambda": [2, 3, 4]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub grid: BTreeMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: BTreeMap<String, Value>,
    pub config: ExperimentConfig,
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("sweep path {path:?} does not name an object field")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The cartesian product of the grid, in lexicographic key order with
    /// the last key varying fastest.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let base = serde_json::to_value(&self.base).expect("config serializes");
        let mut combos: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
        for (key, values) in &self.grid {
            if values.is_empty() {
                return Err(Error::Config(format!("sweep axis {key:?} is empty")));
            }
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.insert(key.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|params| {
                let mut doc = base.clone();
                for (k, v) in &params {
                    set_path(&mut doc, k, v.clone())?;
                }
                let config: ExperimentConfig =
                    serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
                config.validate()?;
                Ok(SweepPoint { params, config })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub params: BTreeMap<String, Value>,
    pub aggregate: Aggregate,
}

pub fn sweep_to_csv(results: &[SweepResult]) -> String {
    let keys: Vec<&String> = results.first().map(|r| r.params.keys().collect()).unwrap_or_default();
    let mut out = String::from("point");
    for k in &keys {
        let _ = write!(out, ",{k}");
    }
    out.push_str(",runs,converged_fraction,tau_mean,tau_stddev,ed_percent_mean,ed_percent_stddev,loss_percent_mean,loss_percent_stddev\n");
    for (i, r) in results.iter().enumerate() {
        let _ = write!(out, "{i}");
        for k in &keys {
            let _ = write!(out, ",{}", r.params[*k].to_string().replace(',', ";"));
        }
        let a = &r.aggregate;
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            a.runs,
            a.converged_fraction,
            a.tau.mean,
            a.tau.stddev,
            a.ed_percent.mean,
            a.ed_percent.stddev,
            a.loss_percent.mean,
            a.loss_percent.stddev
        );
    }
    out
}

/// Runs every grid point; with `out_dir`, each point gets `point_<i>/` and
/// the table goes to `sweep.csv`.
pub fn run_sweep(sweep: &SweepConfig, out_dir: Option<&Path>) -> Result<Vec<SweepResult>> {
    let points = sweep.points()?;
    let mut results = Vec::with_capacity(points.len());
    for (i, p) in points.into_iter().enumerate() {
        let dir = out_dir.map(|d| d.join(format!("point_{i}")));
        let summary = run_experiment(&p.config, dir.as_deref())?;
        results.push(SweepResult {
            params: p.params,
            aggregate: summary.aggregate,
        });
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write(&dir.join("sweep.csv"), &sweep_to_csv(&results))?;
    }
    Ok(results)
}
