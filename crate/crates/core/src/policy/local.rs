use serde::{Deserialize, Serialize};

use super::{mirror_descent_step, OptimizerState};
use crate::equilibrium::mean_field_report;
use crate::error::Result;
use crate::inference::{estimate_utility_gradient, GradientEstimate};
use crate::market::MarketConfig;
use crate::simulator::{context_for_day, run_day, DaySummary, SeedSpec};

/// Where the learner's gradient comes from each day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientSource {
    /// Γ̂ from a simulated day with ζ-perturbed payments.
    #[default]
    Simulated,
    /// The n → ∞ limit of Γ̂: the exact u'_d(p_t) at the day's context.
    MeanField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSettings {
    pub p1: f64,
    pub eta: f64,
    pub horizon: u64,
}

impl Default for LocalSettings {
    fn default() -> Self {
        LocalSettings {
            p1: 30.0,
            eta: 20.0,
            horizon: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDay {
    pub t: u64,
    pub p: f64,
    pub d: f64,
    pub zeta: f64,
    /// Absent in mean-field mode.
    pub summary: Option<DaySummary>,
    pub estimate: GradientEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalRun {
    pub days: Vec<LocalDay>,
    pub state: OptimizerState,
}

/// One learning run of mirror descent driven by local experimentation.
pub fn local_learning_run(
    model: &MarketConfig,
    settings: &LocalSettings,
    seeds: &SeedSpec,
    rep: u64,
    source: GradientSource,
) -> Result<LocalRun> {
    let mut state = OptimizerState::new(settings.p1, settings.eta, model.interval)?;
    let zeta = model.effective_zeta();
    let mut days = Vec::with_capacity(settings.horizon as usize);
    for t in 1..=settings.horizon {
        let p = state.p_current;
        let day = seeds.day(rep, t);
        let (d, summary, estimate) = match source {
            GradientSource::Simulated => {
                let o = run_day(model, p, zeta, &day)?;
                let g = estimate_utility_gradient(&o, p, model);
                (o.d, Some(o.summary()), g)
            }
            GradientSource::MeanField => {
                let d = context_for_day(model, &day);
                let r = mean_field_report(p, d, model)?;
                let g = GradientEstimate {
                    delta_hat: r.delta,
                    upsilon_hat: r.mu_prime,
                    gamma_hat: r.u_prime,
                    dbar: d,
                    zbar: r.mu,
                    valid: true,
                };
                (d, None, g)
            }
        };
        mirror_descent_step(&mut state, estimate.valid.then_some(estimate.gamma_hat));
        days.push(LocalDay {
            t,
            p,
            d,
            zeta,
            summary,
            estimate,
        });
    }
    Ok(LocalRun { days, state })
}
