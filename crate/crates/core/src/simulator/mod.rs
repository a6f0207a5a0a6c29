//! One simulated market day at finite n, and a discrete-event check of the
//! queue allocation curve.

mod queue;
mod seeds;

pub use queue::simulate_queue_allocation;
pub use seeds::{DaySeeds, Role, SeedSpec};

use rand::Rng;
use serde::Serialize;

use crate::equilibrium::{solve_mu, solve_mu_finite_n};
use crate::error::{Error, Result};
use crate::market::MarketConfig;

/// How suppliers form their allocation beliefs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeliefMode {
    /// q = ω(d/μ) at the mean-field fixed point.
    #[default]
    MeanField,
    /// q = E[Ω(n d, X)], X ~ Binomial(n, μ); n ≤ 10⁴.
    FiniteN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    pub n: u64,
    pub d: f64,
    pub demand: u64,
    pub p: f64,
    pub zeta: f64,
    pub epsilon: Vec<i8>,
    pub features: Vec<f64>,
    pub active: Vec<bool>,
    pub t_active: u64,
    pub dbar: f64,
    pub zbar: f64,
    /// Realized platform utility R(D, T) − Σ P_i Z_i S_i.
    pub utility: f64,
    /// utility / n.
    pub utility_scaled: f64,
    /// Anticipated active fraction used in beliefs.
    pub belief_mu: f64,
    /// T = 0: no estimator can use this day.
    pub empty_supply: bool,
}

/// Per-day scalars written to the run log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DaySummary {
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
}

impl DayOutcome {
    pub fn summary(&self) -> DaySummary {
        DaySummary {
            d: self.d,
            demand: self.demand,
            p: self.p,
            zeta: self.zeta,
            t_active: self.t_active,
            utility: self.utility,
            dbar: self.dbar,
            zbar: self.zbar,
        }
    }
}

/// The day's scaled mean demand, as `run_day` would draw it.
pub fn context_for_day(model: &MarketConfig, seeds: &DaySeeds) -> f64 {
    model.context.sample_mean(&mut seeds.stream(Role::Context))
}

pub fn run_day(model: &MarketConfig, p: f64, zeta: f64, seeds: &DaySeeds) -> Result<DayOutcome> {
    run_day_with(model, p, zeta, seeds, BeliefMode::MeanField)
}

pub fn run_day_with(
    model: &MarketConfig,
    p: f64,
    zeta: f64,
    seeds: &DaySeeds,
    beliefs: BeliefMode,
) -> Result<DayOutcome> {
    if !(p > zeta && zeta >= 0.0) {
        return Err(Error::domain("payment p", p, "p > zeta >= 0"));
    }
    let n = model.n;
    let nf = n as f64;
    let d = context_for_day(model, seeds);
    let demand = model
        .context
        .sample_demand(n, d, &mut seeds.stream(Role::Demand));

    let eq = match beliefs {
        BeliefMode::MeanField => solve_mu(p, zeta, d, model)?,
        BeliefMode::FiniteN => solve_mu_finite_n(p, zeta, d, model)?,
    };
    let c = &model.allocation;
    let earn = |pay: f64| match beliefs {
        BeliefMode::MeanField => Ok(model.earning.earning_at_ratio(pay, d / eq.mu, c)),
        BeliefMode::FiniteN => model.earning.earning(pay, eq.q, c),
    };
    let theta_hi = earn(p + zeta)?;
    let theta_lo = earn(p - zeta)?;

    let mut eps_rng = seeds.stream(Role::Perturbations);
    let mut feat_rng = seeds.stream(Role::Features);
    let mut act_rng = seeds.stream(Role::Activations);
    let len = n as usize;
    let mut epsilon = Vec::with_capacity(len);
    let mut features = Vec::with_capacity(len);
    let mut active = Vec::with_capacity(len);
    let mut t_active = 0u64;
    let mut paid_base = 0.0;
    for _ in 0..len {
        let e: i8 = if eps_rng.random::<bool>() { 1 } else { -1 };
        let b = model.choice.outside_option.sample(&mut feat_rng);
        let u: f64 = act_rng.random();
        let theta = if e > 0 { theta_hi } else { theta_lo };
        let z = u < model.choice.choice_prob(b, theta);
        if z {
            t_active += 1;
            paid_base += p + zeta * e as f64;
        }
        epsilon.push(e);
        features.push(b);
        active.push(z);
    }

    let empty_supply = t_active == 0;
    let utility = if empty_supply {
        0.0
    } else {
        let t = t_active as f64;
        let x = demand as f64 / t;
        let served = c.value(x);
        let multiplier = model.earning.payment_multiplier(x, c);
        model.revenue.total(c, demand as f64, t) - paid_base * served * multiplier
    };
    Ok(DayOutcome {
        n,
        d,
        demand,
        p,
        zeta,
        epsilon,
        features,
        active,
        t_active,
        dbar: demand as f64 / nf,
        zbar: t_active as f64 / nf,
        utility,
        utility_scaled: utility / nf,
        belief_mu: eq.mu,
        empty_supply,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{ContextModel, DemandSampler, EarningFunction};

    fn fig2(n: u64) -> MarketConfig {
        MarketConfig {
            n,
            context: ContextModel::fixed(0.4),
            ..Default::default()
        }
    }

    #[test]
    fn identical_seeds_reproduce_bit_exactly() {
        let m = fig2(2000);
        let s = SeedSpec::new(5).day(3, 7);
        let a = run_day(&m, 20.0, 0.5, &s).unwrap();
        let b = run_day(&m, 20.0, 0.5, &s).unwrap();
        assert_eq!(a, b);
        let c = run_day(&m, 20.0, 0.5, &SeedSpec::new(5).day(3, 8)).unwrap();
        assert_ne!(a.active, c.active);
    }

    #[test]
    fn bookkeeping_invariants() {
        for earning in [EarningFunction::Identity, EarningFunction::surge_default()] {
            let m = MarketConfig {
                earning,
                ..fig2(3000)
            };
            let o = run_day(&m, 18.0, 0.5, &SeedSpec::new(1).day(0, 0)).unwrap();
            assert_eq!(o.t_active, o.active.iter().filter(|&&z| z).count() as u64);
            assert!(o.epsilon.iter().all(|&e| e == 1 || e == -1));
            let t = o.t_active as f64;
            let x = o.demand as f64 / t;
            let served = m.allocation.value(x);
            assert!(t * served <= (o.demand as f64 * (1.0 + 1e-9)).min(t));
            let s = m.earning.payment_multiplier(x, &m.allocation);
            let paid: f64 = o
                .active
                .iter()
                .zip(&o.epsilon)
                .filter(|(z, _)| **z)
                .map(|(_, &e)| (18.0 + 0.5 * e as f64) * served * s)
                .sum();
            let revenue = m.revenue.gamma * served * t;
            assert!((o.utility - (revenue - paid)).abs() < 1e-8 * revenue);
        }
    }

    #[test]
    fn activation_is_monotone_in_payment() {
        let m = fig2(2000);
        let s = SeedSpec::new(11).day(0, 0);
        let lo = run_day(&m, 15.0, 0.5, &s).unwrap();
        let hi = run_day(&m, 17.0, 0.5, &s).unwrap();
        assert!(lo.belief_mu < hi.belief_mu);
        for (a, b) in lo.active.iter().zip(&hi.active) {
            assert!(!a || *b);
        }
    }

    #[test]
    fn near_zero_payment_gives_baseline_activation() {
        let m = fig2(20_000);
        let o = run_day(&m, 1e-6, 0.0, &SeedSpec::new(2).day(0, 0)).unwrap();
        let base = m.choice.mean_activation(0.0);
        let sd = (base * (1.0 - base) / 20_000.0).sqrt();
        assert!((o.zbar - base).abs() < 4.0 * sd, "{} {base}", o.zbar);
    }

    #[test]
    fn deterministic_demand_rounds() {
        let m = MarketConfig {
            context: ContextModel {
                sampler: DemandSampler::Deterministic,
                ..ContextModel::fixed(0.4)
            },
            ..fig2(1001)
        };
        let o = run_day(&m, 18.0, 0.5, &SeedSpec::new(0).day(0, 0)).unwrap();
        assert_eq!(o.demand, 400);
    }

    #[test]
    fn finite_beliefs_close_to_mean_field() {
        let m = fig2(5000);
        let s = SeedSpec::new(4).day(1, 1);
        let a = run_day(&m, 18.0, 0.5, &s).unwrap();
        let b = run_day_with(&m, 18.0, 0.5, &s, BeliefMode::FiniteN).unwrap();
        assert!((a.belief_mu - b.belief_mu).abs() < 1e-3);
    }

    #[test]
    fn rejects_perturbation_above_payment() {
        let m = fig2(10);
        assert!(run_day(&m, 0.4, 0.5, &SeedSpec::new(0).day(0, 0)).is_err());
    }
}
