//! Utility-gradient estimates from one day of symmetric payment perturbations.

use serde::Serialize;

use crate::equilibrium::report::{attenuation, settlement, utility_gradient};
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::simulator::DayOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientEstimate {
    #[serde(rename = "DeltaHat")]
    pub delta_hat: f64,
    #[serde(rename = "UpsilonHat")]
    pub upsilon_hat: f64,
    #[serde(rename = "GammaHat")]
    pub gamma_hat: f64,
    #[serde(skip)]
    pub dbar: f64,
    #[serde(skip)]
    pub zbar: f64,
    pub valid: bool,
}

impl GradientEstimate {
    fn invalid(dbar: f64, zbar: f64) -> Self {
        GradientEstimate {
            delta_hat: f64::NAN,
            upsilon_hat: f64::NAN,
            gamma_hat: f64::NAN,
            dbar,
            zbar,
            valid: false,
        }
    }
}

/// Regression slope of activation on the perturbation sign, per unit of
/// payment: ζ⁻¹ Σ(Z − Z̄)(ε − ε̄) / Σ(ε − ε̄)².
pub fn marginal_response(active: &[bool], epsilon: &[i8], zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::domain("zeta", zeta, "zeta > 0"));
    }
    let n = epsilon.len() as f64;
    let (mut se, mut sz, mut sze) = (0i64, 0i64, 0i64);
    for (&z, &e) in active.iter().zip(epsilon) {
        se += e as i64;
        if z {
            sz += 1;
            sze += e as i64;
        }
    }
    let ebar = se as f64 / n;
    let sxx = n * (1.0 - ebar * ebar);
    if se.unsigned_abs() as f64 == n {
        return Err(Error::DegenerateDesign("all perturbation signs are equal"));
    }
    let sxy = sze as f64 - sz as f64 * ebar;
    Ok(sxy / sxx / zeta)
}

pub fn estimate_marginal_response(outcome: &DayOutcome) -> Result<f64> {
    marginal_response(&outcome.active, &outcome.epsilon, outcome.zeta)
}

/// Γ̂ for the model's earning function from plug-ins (Δ̂, D̄, Z̄):
/// Υ̂ = Δ̂ / (1 + (∂₂θ/∂₁θ) ω'(x̂) (D̄/Z̄²) Δ̂), x̂ = D̄/Z̄, and
/// Γ̂ = Υ̂ [m(x̂) − m'(x̂) x̂] − g(x̂) Z̄ with m, g the settlement margin and
/// cost rate. For identity earnings this is
/// Γ̂ = Υ̂ [r − pω − (r' − pω') x̂] − ω Z̄.
pub fn gradient_from_plugins(
    delta_hat: f64,
    dbar: f64,
    zbar: f64,
    p: f64,
    model: &MarketConfig,
) -> GradientEstimate {
    if !(zbar > 0.0 && dbar > 0.0 && delta_hat.is_finite()) {
        return GradientEstimate::invalid(dbar, zbar);
    }
    let x = dbar / zbar;
    if model.earning.is_surge() && model.allocation.value(x) >= model.allocation.saturation() {
        return GradientEstimate::invalid(dbar, zbar);
    }
    let denom = attenuation(model, p, x, zbar, delta_hat);
    if !(denom > 0.0 && denom.is_finite()) {
        return GradientEstimate::invalid(dbar, zbar);
    }
    let upsilon_hat = delta_hat / denom;
    let s = settlement(model, p, x);
    let gamma_hat = utility_gradient(&s, x, zbar, upsilon_hat);
    if !gamma_hat.is_finite() {
        return GradientEstimate::invalid(dbar, zbar);
    }
    GradientEstimate {
        delta_hat,
        upsilon_hat,
        gamma_hat,
        dbar,
        zbar,
        valid: true,
    }
}

/// Γ̂ for one day. Empty supply or a one-signed design yields an invalid
/// estimate rather than an error.
pub fn estimate_utility_gradient(
    outcome: &DayOutcome,
    p: f64,
    model: &MarketConfig,
) -> GradientEstimate {
    if outcome.empty_supply {
        return GradientEstimate::invalid(outcome.dbar, outcome.zbar);
    }
    match estimate_marginal_response(outcome) {
        Ok(delta_hat) => gradient_from_plugins(delta_hat, outcome.dbar, outcome.zbar, p, model),
        Err(_) => GradientEstimate::invalid(outcome.dbar, outcome.zbar),
    }
}

/// Surge-adjusted Γ̂; requires a surge earning function.
pub fn estimate_utility_gradient_surge(
    outcome: &DayOutcome,
    p: f64,
    model: &MarketConfig,
) -> Result<GradientEstimate> {
    if !model.earning.is_surge() {
        return Err(Error::Config(
            "surge estimator needs a surge earning function".into(),
        ));
    }
    Ok(estimate_utility_gradient(outcome, p, model))
}
