use serde::{Deserialize, Serialize};

use super::{check_inputs, solve_mu_unchecked};
use crate::error::Result;
use crate::market::MarketConfig;

/// Mean-field quantities at payment `p` and scaled demand `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldReport {
    pub p: f64,
    pub d: f64,
    pub mu: f64,
    pub q: f64,
    pub u: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "muPrime")]
    pub mu_prime: f64,
    #[serde(rename = "uPrime")]
    pub u_prime: f64,
    /// Interference factor R; μ' = Δ / (1 + R).
    #[serde(rename = "R")]
    pub interference: f64,
    #[serde(rename = "sigmaDelta")]
    pub sigma_delta: f64,
    #[serde(rename = "sigmaOmega")]
    pub sigma_omega: f64,
    #[serde(skip)]
    pub degenerate: bool,
}

/// Utility pieces shared by the mean-field report and the estimators, all
/// evaluated at the ratio x = d/μ with a given supply level μ and supply
/// derivative μ'.
pub(crate) struct Settlement {
    /// Per-active-supplier margin r(x) − p g(x).
    pub margin: f64,
    /// r'(x) − p g'(x).
    pub margin_slope: f64,
    /// g(x) = s(x) ω(x): payment per unit of base pay per active supplier.
    pub cost_rate: f64,
}

pub(crate) fn settlement(model: &MarketConfig, p: f64, x: f64) -> Settlement {
    let c = &model.allocation;
    let w = c.value(x);
    let dw = c.slope(x);
    let s = model.earning.payment_multiplier(x, c);
    let ds = model.earning.payment_multiplier_slope(x, c);
    let g = s * w;
    let dg = ds * w + s * dw;
    Settlement {
        margin: model.revenue.r(c, x) - p * g,
        margin_slope: model.revenue.r_prime(c, x) - p * dg,
        cost_rate: g,
    }
}

/// u' = μ'[m(x) − m'(x) x] − g(x) μ with m the per-supplier margin.
pub(crate) fn utility_gradient(s: &Settlement, x: f64, mu: f64, mu_prime: f64) -> f64 {
    mu_prime * (s.margin - s.margin_slope * x) - s.cost_rate * mu
}

/// 1 + R with R = (∂₂θ/∂₁θ) ω'(x) (x/μ) Δ.
pub(crate) fn attenuation(model: &MarketConfig, p: f64, x: f64, mu: f64, delta: f64) -> f64 {
    let (t1, t2) = model.earning.partials_at_ratio(p, x, &model.allocation);
    1.0 + t2 / t1 * model.allocation.slope(x) * (x / mu) * delta
}

pub fn mean_field_report(p: f64, d: f64, model: &MarketConfig) -> Result<MeanFieldReport> {
    check_inputs(p, 0.0, d)?;
    let eq = solve_mu_unchecked(p, 0.0, d, model);
    let mu = eq.mu;
    let x = d / mu;
    let c = &model.allocation;
    let q = c.value(x);
    let (t1, t2) = model.earning.partials_at_ratio(p, x, c);
    let theta = model.earning.earning_at_ratio(p, x, c);
    let delta = t1 * model.choice.average(theta).slope;
    let sigma_delta = t2 / t1 * q * delta / mu;
    let sigma_omega = x * c.slope(x) / q;
    let interference = sigma_delta * sigma_omega;
    let mu_prime = delta / (1.0 + interference);
    let s = settlement(model, p, x);
    Ok(MeanFieldReport {
        p,
        d,
        mu,
        q,
        u: s.margin * mu,
        delta,
        mu_prime,
        u_prime: utility_gradient(&s, x, mu, mu_prime),
        interference,
        sigma_delta,
        sigma_omega,
        degenerate: eq.degenerate,
    })
}

/// Mean-field platform utility per supplier, u_d(p).
pub fn utility(p: f64, d: f64, model: &MarketConfig) -> Result<f64> {
    perturbed_utility(p, 0.0, d, model)
}

/// Mean-field utility per supplier when payments are p ± ζ with fair signs:
/// revenue at the perturbed equilibrium minus the expected payout.
pub fn perturbed_utility(p: f64, zeta: f64, d: f64, model: &MarketConfig) -> Result<f64> {
    check_inputs(p, zeta, d)?;
    Ok(perturbed_utility_unchecked(p, zeta, d, model))
}

pub(crate) fn perturbed_utility_unchecked(p: f64, zeta: f64, d: f64, model: &MarketConfig) -> f64 {
    let mu = solve_mu_unchecked(p, zeta, d, model).mu;
    let x = d / mu;
    let c = &model.allocation;
    let revenue = model.revenue.r(c, x) * mu;
    let g = settlement(model, p, x).cost_rate;
    if zeta == 0.0 {
        return revenue - p * g * mu;
    }
    let e = &model.earning;
    let f_hi = model
        .choice
        .mean_activation(e.earning_at_ratio(p + zeta, x, c));
    let f_lo = model
        .choice
        .mean_activation(e.earning_at_ratio(p - zeta, x, c));
    revenue - g * 0.5 * ((p + zeta) * f_hi + (p - zeta) * f_lo)
}

/// E_d[u_d(p)] against probability-weighted context nodes.
pub fn expected_utility(p: f64, model: &MarketConfig, nodes: &[(f64, f64)]) -> Result<f64> {
    check_inputs(p, 0.0, 1.0)?;
    Ok(nodes
        .iter()
        .map(|&(d, w)| w * perturbed_utility_unchecked(p, 0.0, d, model))
        .sum())
}
