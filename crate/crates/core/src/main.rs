// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eqexp::error::{Error, Result};
use eqexp::harness::{self, ExperimentConfig, Method};
use eqexp::inference::estimate_utility_gradient;
use eqexp::market::{AllocationCurve, DemandMean};
use eqexp::policy::GradientSource;
use eqexp::simulator::{run_day, simulate_queue_allocation, SeedSpec};

#[derive(Parser)]
#[command(
    name = "eqexp",
    version,
    about = "Experimenting in equilibrium: marketplace payment learning"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in configuration: fig2, fig3, sec6, sec6-surge.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    replications: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Pay the ratio surge multiplier s(x) = x / ω(x).
    #[arg(long, global = true)]
    surge: bool,
    /// Risk-averse suppliers: identity, sqrt or log.
    #[arg(long, global = true, value_name = "NAME")]
    risk_beta: Option<String>,
    /// Drive the local learner with exact mean-field gradients.
    #[arg(long, global = true)]
    mean_field: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field curves over a payment grid.
    Curves {
        /// Scaled demand values; defaults to the context's point mass or 0.4.
        #[arg(long, value_delimiter = ',')]
        d: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        p_min: f64,
        #[arg(long, default_value_t = 40.0)]
        p_max: f64,
        #[arg(long, default_value_t = 0.25)]
        p_step: f64,
    },
    /// Simulate one market day and estimate the utility gradient.
    SimulateDay {
        #[arg(long, default_value_t = 20.0)]
        p: f64,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(long, default_value_t = 1)]
        day: u64,
    },
    /// Mirror descent driven by local experimentation.
    OptimizeLocal,
    /// Explore-then-exploit baseline over the configured exploration lengths.
    OptimizeGlobal {
        #[arg(long, value_delimiter = ',')]
        explore_t: Vec<u64>,
    },
    /// Population-optimal payment.
    Oracle,
    /// Local learner and global baseline on common contexts.
    Compare {
        #[arg(long, value_delimiter = ',')]
        explore_t: Vec<u64>,
    },
    /// Discrete-event check of the queue allocation curve.
    ValidateQueue {
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.8,1.0,2.0")]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        servers: usize,
        #[arg(long, default_value_t = 1_000_000)]
        events: u64,
    },
}

fn default_preset(cmd: &Command) -> &'static str {
    match cmd {
        Command::Curves { .. } | Command::SimulateDay { .. } => "fig2",
        _ => "sec6",
    }
}

fn resolve(common: &Common, cmd: &Command) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--config and --preset are mutually exclusive".into(),
            ))
        }
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(default_preset(cmd))?,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(r) = common.replications {
        cfg.replications = r;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if common.surge && common.risk_beta.is_some() {
        return Err(Error::Config(
            "--surge and --risk-beta are mutually exclusive".into(),
        ));
    }
    if common.surge {
        cfg.apply_surge();
    }
    if let Some(name) = &common.risk_beta {
        cfg.apply_risk(name)?;
    }
    if common.mean_field {
        cfg.gradient_source = GradientSource::MeanField;
    }
    match cmd {
        Command::OptimizeGlobal { explore_t } | Command::Compare { explore_t }
            if !explore_t.is_empty() =>
        {
            cfg.explore_t = explore_t.clone();
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct DayReport {
    rep: u64,
    day: u64,
    #[serde(flatten)]
    summary: eqexp::simulator::DaySummary,
    belief_mu: f64,
    empty_supply: bool,
    #[serde(flatten)]
    estimate: eqexp::inference::GradientEstimate,
}

#[derive(Serialize)]
struct QueueRow {
    ratio: f64,
    simulated: f64,
    omega: f64,
    relative_error: f64,
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.common, &cli.command)?;
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::Curves {
            d,
            p_min,
            p_max,
            p_step,
        } => {
            if !(p_min > 0.0 && p_max >= p_min && p_step > 0.0) {
                return Err(Error::Config(
                    "payment grid needs 0 < p-min <= p-max and p-step > 0".into(),
                ));
            }
            let d_values = if d.is_empty() {
                match cfg.model.context.demand_mean {
                    DemandMean::PointMass { d } => vec![d],
                    DemandMean::Beta { .. } => vec![0.4],
                }
            } else {
                d
            };
            let steps = ((p_max - p_min) / p_step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|k| p_min + p_step * k as f64).collect();
            let rows = harness::emit_curves(&cfg.model, &grid, &d_values)?;
            let path = out.join("curves.csv");
            harness::write_csv(&path, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::SimulateDay { p, zeta, rep, day } => {
            let zeta = zeta.unwrap_or_else(|| cfg.model.effective_zeta());
            let seeds = SeedSpec::new(cfg.seed).day(rep, day);
            let o = run_day(&cfg.model, p, zeta, &seeds)?;
            let estimate = estimate_utility_gradient(&o, p, &cfg.model);
            print_json(&DayReport {
                rep,
                day,
                summary: o.summary(),
                belief_mu: o.belief_mu,
                empty_supply: o.empty_supply,
                estimate,
            })?;
        }
        Command::OptimizeLocal => print_json(&harness::run_experiment(&cfg, &[Method::Local])?)?,
        Command::OptimizeGlobal { .. } => {
            print_json(&harness::run_experiment(&cfg, &[Method::Global])?)?
        }
        Command::Compare { .. } => print_json(&harness::run_experiment(
            &cfg,
            &[Method::Local, Method::Global],
        )?)?,
        Command::Oracle => print_json(&harness::run_experiment(&cfg, &[Method::Oracle])?.oracle)?,
        Command::ValidateQueue {
            ratios,
            servers,
            events,
        } => {
            let capacity = match cfg.model.allocation {
                AllocationCurve::FiniteCapacityQueue { capacity } => capacity,
                AllocationCurve::Uncongested => {
                    return Err(Error::Config(
                        "queue validation needs a finite-capacity queue".into(),
                    ))
                }
            };
            if servers == 0 || events < 100_000 || ratios.iter().any(|&r| !(r > 0.0)) {
                return Err(Error::Config(
                    "queue validation needs servers >= 1, events >= 1e5 and positive ratios".into(),
                ));
            }
            let rows: Vec<QueueRow> = ratios
                .iter()
                .enumerate()
                .map(|(k, &ratio)| {
                    let simulated = simulate_queue_allocation(
                        ratio * servers as f64,
                        servers,
                        capacity,
                        events,
                        cfg.seed.wrapping_add(k as u64),
                    );
                    let omega = cfg.model.allocation.value(ratio);
                    QueueRow {
                        ratio,
                        simulated,
                        omega,
                        relative_error: simulated / omega - 1.0,
                    }
                })
                .collect();
            harness::write_csv(&out.join("queue.csv"), &rows)?;
            print_json(&rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
