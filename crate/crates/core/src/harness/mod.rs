//! Replications, regret accounting, persistence.

mod config;
mod run;
mod stats;

pub use config::{ExperimentConfig, Method, RegretMode, PRESETS, SCHEMA_VERSION};
pub use run::{
    benchmark, benchmarks, run_global, run_local, Benchmark, MethodResult, RepResult, RunLogRow,
    TrajectoryRow,
};
pub use stats::{weighted_regret_path, RegretReport, Stats};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::equilibrium::{mean_field_report, MeanFieldReport};
use crate::error::Result;
use crate::market::MarketConfig;
use crate::policy::{oracle_optimal_payment, OraclePayment};

pub const ORACLE_CACHE: &str = "oracle_cache.json";

/// Hex SHA-256 of the model's canonical JSON.
pub fn model_hash(model: &MarketConfig) -> Result<String> {
    let bytes = serde_json::to_vec(model)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct OracleRecord {
    model_hash: String,
    oracle: OraclePayment,
}

/// The oracle for `model`, reusing `dir/oracle_cache.json` when its hash
/// matches and rewriting it otherwise.
pub fn cached_oracle(model: &MarketConfig, dir: Option<&Path>) -> Result<OraclePayment> {
    let hash = model_hash(model)?;
    if let Some(dir) = dir {
        let path = dir.join(ORACLE_CACHE);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(rec) = serde_json::from_str::<OracleRecord>(&text) {
                if rec.model_hash == hash {
                    return Ok(rec.oracle);
                }
            }
        }
    }
    let oracle = oracle_optimal_payment(model)?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let rec = OracleRecord {
            model_hash: hash,
            oracle,
        };
        fs::write(dir.join(ORACLE_CACHE), serde_json::to_string_pretty(&rec)?)?;
    }
    Ok(oracle)
}

/// Mean-field curves on a payment grid for each scaled demand.
pub fn emit_curves(
    model: &MarketConfig,
    p_grid: &[f64],
    d_values: &[f64],
) -> Result<Vec<MeanFieldReport>> {
    let mut rows = Vec::with_capacity(p_grid.len() * d_values.len());
    for &d in d_values {
        for &p in p_grid {
            rows.push(mean_field_report(p, d, model)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: &'static str,
    pub explore_t: Option<u64>,
    #[serde(rename = "inSampleRegret")]
    pub in_sample_regret: Stats,
    #[serde(rename = "futureRegret")]
    pub future_regret: Stats,
    /// p̄ for the local learner, p̂ for the global baseline.
    pub deployed_payment: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub model_hash: String,
    pub seed: u64,
    pub replications: u64,
    pub horizon: u64,
    pub oracle: OraclePayment,
    pub local: Option<MethodSummary>,
    pub global: Vec<MethodSummary>,
    /// Exploration length with the smallest mean in-sample regret.
    pub best_global_explore_t: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct RegretRow {
    method: &'static str,
    explore_t: Option<u64>,
    rep: u64,
    in_sample: f64,
    future: f64,
    deployed: f64,
}

fn summarize(method: &'static str, r: &MethodResult) -> MethodSummary {
    MethodSummary {
        method,
        explore_t: r.explore_t,
        in_sample_regret: r.report.in_sample.clone(),
        future_regret: r.report.future.clone(),
        deployed_payment: r.deployed.clone(),
    }
}

fn regret_rows(method: &'static str, r: &MethodResult) -> Vec<RegretRow> {
    r.reps
        .iter()
        .map(|x| RegretRow {
            method,
            explore_t: r.explore_t,
            rep: x.rep,
            in_sample: x.in_sample,
            future: x.future,
            deployed: x.deployed,
        })
        .collect()
}

/// CSV of `(key, row)` pairs with a leading `key_name` column.
fn write_keyed_csv<T: Serialize>(
    path: &Path,
    key_name: &str,
    groups: &[(u64, Vec<T>)],
) -> Result<()> {
    let mut out = String::new();
    for (i, (key, rows)) in groups.iter().enumerate() {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        let text = String::from_utf8(bytes).expect("csv output is utf-8");
        for (k, line) in text.lines().enumerate() {
            if k == 0 {
                if i == 0 {
                    out.push_str(key_name);
                    out.push(',');
                    out.push_str(line);
                    out.push('\n');
                }
                continue;
            }
            out.push_str(&key.to_string());
            out.push(',');
            out.push_str(line);
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Runs the configured methods, writes logs and `summary.json` under
/// `cfg.out_dir`, and returns the summary. `Method::Oracle` computes only
/// the oracle.
pub fn run_experiment(cfg: &ExperimentConfig, methods: &[Method]) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), cfg.to_json()?)?;
    let oracle = cached_oracle(&cfg.model, Some(dir))?;
    let wants = |m: Method| methods.contains(&m);
    let benches = if wants(Method::Local) || wants(Method::Global) {
        benchmarks(cfg, &oracle)
    } else {
        vec![]
    };
    let mut regrets = Vec::new();
    let local = if wants(Method::Local) {
        let r = run_local(cfg, &oracle, &benches)?;
        let traj: Vec<TrajectoryRow> = r
            .reps
            .iter()
            .flat_map(|x| x.trajectory.iter().copied())
            .collect();
        let log: Vec<RunLogRow> = r.reps.iter().flat_map(|x| x.log.iter().copied()).collect();
        write_csv(&dir.join("local_trajectory.csv"), &traj)?;
        write_csv(&dir.join("local_run_log.csv"), &log)?;
        regrets.extend(regret_rows("local", &r));
        Some(summarize("local", &r))
    } else {
        None
    };
    let mut global = Vec::new();
    if wants(Method::Global) {
        let results = run_global(cfg, &oracle, &benches)?;
        let mut traj = Vec::new();
        let mut log = Vec::new();
        for r in &results {
            let e = r
                .explore_t
                .expect("global results carry their exploration length");
            traj.push((
                e,
                r.reps
                    .iter()
                    .flat_map(|x| x.trajectory.iter().copied())
                    .collect::<Vec<_>>(),
            ));
            log.push((
                e,
                r.reps
                    .iter()
                    .flat_map(|x| x.log.iter().copied())
                    .collect::<Vec<_>>(),
            ));
            regrets.extend(regret_rows("global", r));
            global.push(summarize("global", r));
        }
        write_keyed_csv(&dir.join("global_trajectory.csv"), "explore_t", &traj)?;
        write_keyed_csv(&dir.join("global_run_log.csv"), "explore_t", &log)?;
    }
    if !regrets.is_empty() {
        write_csv(&dir.join("regrets.csv"), &regrets)?;
    }
    let best_global_explore_t = global
        .iter()
        .min_by(|a, b| a.in_sample_regret.mean.total_cmp(&b.in_sample_regret.mean))
        .and_then(|s| s.explore_t);
    let summary = ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        model_hash: model_hash(&cfg.model)?,
        seed: cfg.seed,
        replications: cfg.replications,
        horizon: cfg.horizon,
        oracle,
        local,
        global,
        best_global_explore_t,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}
