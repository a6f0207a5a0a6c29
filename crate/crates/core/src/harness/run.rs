use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, RegretMode};
use super::stats::{RegretReport, Stats};
use crate::equilibrium::expected_utility;
use crate::equilibrium::report::perturbed_utility_unchecked;
use crate::error::Result;
use crate::market::MarketConfig;
use crate::policy::{averaged_payment, global_explore_exploit, local_learning_run, OraclePayment};
use crate::simulator::{context_for_day, SeedSpec};

/// Context nodes for the future-regret expectation.
const FUTURE_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub rep: u64,
    pub t: u64,
    pub p_t: f64,
    #[serde(rename = "GammaHat")]
    pub gamma_hat: Option<f64>,
    pub d_t: f64,
    pub u_t: f64,
    pub regret_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunLogRow {
    pub rep: u64,
    pub t: u64,
    pub d: f64,
    #[serde(rename = "D")]
    pub demand: u64,
    pub p: f64,
    pub zeta: f64,
    #[serde(rename = "T")]
    pub t_active: u64,
    #[serde(rename = "U")]
    pub utility: f64,
    #[serde(rename = "Dbar")]
    pub dbar: f64,
    #[serde(rename = "Zbar")]
    pub zbar: f64,
    #[serde(rename = "DeltaHat")]
    pub delta_hat: Option<f64>,
    #[serde(rename = "UpsilonHat")]
    pub upsilon_hat: Option<f64>,
    #[serde(rename = "GammaHat")]
    pub gamma_hat: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepResult {
    pub rep: u64,
    pub in_sample: f64,
    pub future: f64,
    /// p̄_T for the local learner, p̂ for the global baseline.
    pub deployed: f64,
    pub trajectory: Vec<TrajectoryRow>,
    pub log: Vec<RunLogRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    /// None for the local learner.
    pub explore_t: Option<u64>,
    pub reps: Vec<RepResult>,
    pub report: RegretReport,
    pub deployed: Stats,
}

impl MethodResult {
    fn collect(explore_t: Option<u64>, reps: Vec<RepResult>) -> Self {
        let ins: Vec<f64> = reps.iter().map(|r| r.in_sample).collect();
        let fut: Vec<f64> = reps.iter().map(|r| r.future).collect();
        let dep: Vec<f64> = reps.iter().map(|r| r.deployed).collect();
        MethodResult {
            explore_t,
            report: RegretReport {
                in_sample: Stats::from_values(&ins),
                future: Stats::from_values(&fut),
            },
            deployed: Stats::from_values(&dep),
            reps,
        }
    }
}

/// Per-replication benchmark: the day's context and u_{d_t}(p*).
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub contexts: Vec<f64>,
    pub best: Vec<f64>,
}

pub fn benchmark(cfg: &ExperimentConfig, oracle: &OraclePayment, rep: u64) -> Benchmark {
    let seeds = SeedSpec::new(cfg.seed);
    let contexts: Vec<f64> = (1..=cfg.horizon)
        .map(|t| context_for_day(&cfg.model, &seeds.day(rep, t)))
        .collect();
    let best = contexts
        .iter()
        .map(|&d| perturbed_utility_unchecked(oracle.p_star, 0.0, d, &cfg.model))
        .collect();
    Benchmark { contexts, best }
}

pub fn benchmarks(cfg: &ExperimentConfig, oracle: &OraclePayment) -> Vec<Benchmark> {
    (0..cfg.replications)
        .into_par_iter()
        .map(|rep| benchmark(cfg, oracle, rep))
        .collect()
}

fn future_regret(model: &MarketConfig, oracle: &OraclePayment, p: f64) -> Result<f64> {
    let nodes = model.context.expectation_nodes(FUTURE_ORDER);
    Ok(expected_utility(oracle.p_star, model, &nodes)? - expected_utility(p, model, &nodes)?)
}

fn local_rep(
    cfg: &ExperimentConfig,
    oracle: &OraclePayment,
    bench: &Benchmark,
    rep: u64,
) -> Result<RepResult> {
    let seeds = SeedSpec::new(cfg.seed);
    let settings = crate::policy::LocalSettings {
        horizon: cfg.horizon,
        ..cfg.local
    };
    let run = local_learning_run(&cfg.model, &settings, &seeds, rep, cfg.gradient_source)?;
    let mut trajectory = Vec::with_capacity(run.days.len());
    let mut log = Vec::new();
    let mut total = 0.0;
    for (k, day) in run.days.iter().enumerate() {
        let zeta = match cfg.regret_mode {
            RegretMode::MeanField => 0.0,
            RegretMode::ZetaInclusive => day.zeta,
        };
        let u = perturbed_utility_unchecked(day.p, zeta, day.d, &cfg.model);
        let regret = bench.best[k] - u;
        total += regret;
        let g = &day.estimate;
        trajectory.push(TrajectoryRow {
            rep,
            t: day.t,
            p_t: day.p,
            gamma_hat: g.valid.then_some(g.gamma_hat),
            d_t: day.d,
            u_t: u,
            regret_t: regret,
        });
        if let Some(s) = &day.summary {
            log.push(RunLogRow {
                rep,
                t: day.t,
                d: s.d,
                demand: s.demand,
                p: s.p,
                zeta: s.zeta,
                t_active: s.t_active,
                utility: s.utility,
                dbar: s.dbar,
                zbar: s.zbar,
                delta_hat: g.valid.then_some(g.delta_hat),
                upsilon_hat: g.valid.then_some(g.upsilon_hat),
                gamma_hat: g.valid.then_some(g.gamma_hat),
                valid: g.valid,
            });
        }
    }
    let p_bar = averaged_payment(&run.state)?;
    Ok(RepResult {
        rep,
        in_sample: total / cfg.horizon as f64,
        future: future_regret(&cfg.model, oracle, p_bar)?,
        deployed: p_bar,
        trajectory,
        log,
    })
}

fn global_rep(
    cfg: &ExperimentConfig,
    oracle: &OraclePayment,
    bench: &Benchmark,
    explore_t: u64,
    rep: u64,
) -> Result<RepResult> {
    let seeds = SeedSpec::new(cfg.seed);
    let run = global_explore_exploit(&cfg.model, explore_t, cfg.horizon, &seeds, rep)?;
    let p_hat = run.policy.p_hat;
    let mut trajectory = Vec::with_capacity(cfg.horizon as usize);
    let mut log = Vec::with_capacity(run.explore.len());
    let mut total = 0.0;
    for t in 1..=cfg.horizon {
        let k = (t - 1) as usize;
        let d = bench.contexts[k];
        let p = run.explore.get(k).map_or(p_hat, |e| e.p);
        let u = perturbed_utility_unchecked(p, 0.0, d, &cfg.model);
        let regret = bench.best[k] - u;
        total += regret;
        trajectory.push(TrajectoryRow {
            rep,
            t,
            p_t: p,
            gamma_hat: None,
            d_t: d,
            u_t: u,
            regret_t: regret,
        });
    }
    for e in &run.explore {
        log.push(RunLogRow {
            rep,
            t: e.t,
            d: e.d,
            demand: e.demand,
            p: e.p,
            zeta: 0.0,
            t_active: e.t_active,
            utility: e.utility_scaled * cfg.model.n as f64,
            dbar: e.demand as f64 / cfg.model.n as f64,
            zbar: e.t_active as f64 / cfg.model.n as f64,
            delta_hat: None,
            upsilon_hat: None,
            gamma_hat: None,
            valid: false,
        });
    }
    Ok(RepResult {
        rep,
        in_sample: total / cfg.horizon as f64,
        future: future_regret(&cfg.model, oracle, p_hat)?,
        deployed: p_hat,
        trajectory,
        log,
    })
}

pub fn run_local(
    cfg: &ExperimentConfig,
    oracle: &OraclePayment,
    benches: &[Benchmark],
) -> Result<MethodResult> {
    let reps = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| local_rep(cfg, oracle, &benches[rep as usize], rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(MethodResult::collect(None, reps))
}

pub fn run_global(
    cfg: &ExperimentConfig,
    oracle: &OraclePayment,
    benches: &[Benchmark],
) -> Result<Vec<MethodResult>> {
    let jobs: Vec<(u64, u64)> = cfg
        .explore_t
        .iter()
        .flat_map(|&e| (0..cfg.replications).map(move |rep| (e, rep)))
        .collect();
    let mut results = jobs
        .into_par_iter()
        .map(|(e, rep)| global_rep(cfg, oracle, &benches[rep as usize], e, rep))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    Ok(cfg
        .explore_t
        .iter()
        .map(|&e| {
            let reps: Vec<RepResult> = results.by_ref().take(cfg.replications as usize).collect();
            MethodResult::collect(Some(e), reps)
        })
        .collect())
}
