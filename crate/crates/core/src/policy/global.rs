use rand::Rng;
use serde::Serialize;

use super::smoother::{fit_smoother, Smoother};
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::simulator::{run_day, Role, SeedSpec};

/// Payments explored uniformly on this range; the exploit payment is chosen
/// from it.
pub const PRICE_RANGE: (f64, f64) = (10.0, 30.0);
const MIN_EXPLORE: u64 = 10;
const ARGMAX_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExploreDay {
    pub t: u64,
    pub p: f64,
    pub d: f64,
    pub demand: u64,
    pub t_active: u64,
    /// Realized utility per supplier U_t / n.
    pub utility_scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPolicy {
    pub explore_t: u64,
    pub price_range: (f64, f64),
    pub smoother: Smoother,
    pub p_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRun {
    pub policy: GlobalPolicy,
    pub explore: Vec<ExploreDay>,
}

/// Explores for `explore_t` days at uniform random payments without
/// perturbation, fits U_t/n against p_t, and returns the maximizer of the
/// fit. Days are numbered from 1 and share context streams with any other
/// method run on the same (seeds, rep).
pub fn global_explore_exploit(
    model: &MarketConfig,
    explore_t: u64,
    horizon: u64,
    seeds: &SeedSpec,
    rep: u64,
) -> Result<GlobalRun> {
    if explore_t < MIN_EXPLORE {
        return Err(Error::Config(format!(
            "global exploration needs at least {MIN_EXPLORE} days, got {explore_t}"
        )));
    }
    if explore_t > horizon {
        return Err(Error::Config(format!(
            "exploration length {explore_t} exceeds the horizon {horizon}"
        )));
    }
    let (lo, hi) = PRICE_RANGE;
    let mut explore = Vec::with_capacity(explore_t as usize);
    for t in 1..=explore_t {
        let day = seeds.day(rep, t);
        let p = day.stream(Role::Exploration).random_range(lo..hi);
        let o = run_day(model, p, 0.0, &day)?;
        explore.push(ExploreDay {
            t,
            p,
            d: o.d,
            demand: o.demand,
            t_active: o.t_active,
            utility_scaled: o.utility_scaled,
        });
    }
    let (ps, us): (Vec<f64>, Vec<f64>) = explore.iter().map(|e| (e.p, e.utility_scaled)).unzip();
    let smoother = fit_smoother(&ps, &us);
    let p_hat = smoother.argmax(lo, hi, ARGMAX_GRID);
    Ok(GlobalRun {
        policy: GlobalPolicy {
            explore_t,
            price_range: PRICE_RANGE,
            smoother,
            p_hat,
        },
        explore,
    })
}
