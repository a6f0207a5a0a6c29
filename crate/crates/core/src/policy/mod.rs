//! Payment-setting algorithms.

mod global;
mod local;
mod oracle;
mod smoother;

pub use global::{global_explore_exploit, ExploreDay, GlobalPolicy, GlobalRun, PRICE_RANGE};
pub use local::{local_learning_run, GradientSource, LocalDay, LocalRun, LocalSettings};
pub use oracle::{oracle_optimal_payment, OracleMethod, OraclePayment};
pub use smoother::{fit_smoother, Smoother, SmootherKind};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::PaymentInterval;

/// Mirror-descent learner with weights s = t on past periods:
/// p_{t+1} = argmin_p { (1/2η) Σ s (p − p_s)² − θ_t p : p ∈ I }.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerState {
    /// Periods completed.
    pub t: u64,
    pub eta: f64,
    #[serde(skip)]
    pub interval: PaymentInterval,
    pub sum_sp: f64,
    pub sum_s: f64,
    /// θ_t = Σ s Γ̂_s.
    pub theta: f64,
    /// Payment for the next period.
    pub p_current: f64,
    /// Σ t p_t.
    pub p_bar_numerator: f64,
    /// p_1, p_2, … including `p_current`.
    pub trajectory: Vec<f64>,
}

impl OptimizerState {
    pub fn new(p1: f64, eta: f64, interval: PaymentInterval) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!(
                "step size must be positive, got {eta}"
            )));
        }
        let p1 = interval.clip(p1);
        Ok(OptimizerState {
            t: 0,
            eta,
            interval,
            sum_sp: 0.0,
            sum_s: 0.0,
            theta: 0.0,
            p_current: p1,
            p_bar_numerator: 0.0,
            trajectory: vec![p1],
        })
    }
}

/// Closes period t = state.t + 1 with gradient estimate `gamma_hat`. An
/// absent estimate advances the accumulators without a gradient and keeps
/// the payment unchanged.
pub fn mirror_descent_step(state: &mut OptimizerState, gamma_hat: Option<f64>) {
    let t = (state.t + 1) as f64;
    let p = state.p_current;
    state.t += 1;
    state.sum_sp += t * p;
    state.sum_s += t;
    state.p_bar_numerator += t * p;
    state.p_current = match gamma_hat {
        Some(g) => {
            state.theta += t * g;
            state
                .interval
                .clip((state.sum_sp + state.eta * state.theta) / state.sum_s)
        }
        None => p,
    };
    state.trajectory.push(state.p_current);
}

/// p̄_T = 2 Σ t p_t / (T (T + 1)) over the completed periods.
pub fn averaged_payment(state: &OptimizerState) -> Result<f64> {
    if state.t == 0 {
        return Err(Error::domain("completed periods", 0.0, "t >= 1"));
    }
    let t = state.t as f64;
    Ok(2.0 * state.p_bar_numerator / (t * (t + 1.0)))
}
