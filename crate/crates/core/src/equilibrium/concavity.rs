use serde::Serialize;

use super::report::mean_field_report;
use crate::error::{Error, Result};
use crate::market::MarketConfig;

/// Numerical check of the sufficient conditions for strong concavity of
/// u_d, per context node. Reported separately from the grid verdict: the
/// conditions are sufficient, not necessary.
#[derive(Debug, Clone, Serialize)]
pub struct PremiseCheck {
    /// max f̄'' over the induced earnings range; ≤ 0 when f̄ is concave there.
    pub choice_curvature_max: f64,
    /// min over nodes of f̄(x̲) − f̄'(x̲) x̲.
    pub tangent_intercept_min: f64,
    /// max ω'' over the induced ratio range.
    pub allocation_curvature_max: f64,
    pub choice_concave: bool,
    pub tangent_condition: bool,
    pub allocation_concave: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    /// Every second difference of E_d[u_d(p)] on the grid is negative.
    pub pass: bool,
    /// Largest (least negative) second difference.
    pub worst_second_difference: f64,
    pub grid: Vec<f64>,
    pub expected_utility: Vec<f64>,
    /// min over nodes and grid of −u_d''(p).
    pub sigma_hat: f64,
    /// max over nodes and grid of |u_d'(p)|.
    pub gradient_bound: f64,
    pub premises: PremiseCheck,
}

pub fn concavity_diagnostic(
    model: &MarketConfig,
    lo: f64,
    hi: f64,
    grid_size: usize,
    context_order: usize,
) -> Result<ConcavityReport> {
    if grid_size < 3 || !(lo < hi) || !(lo > 0.0) {
        return Err(Error::Config(format!(
            "concavity grid needs lo < hi, lo > 0 and at least 3 points (got [{lo}, {hi}], {grid_size})"
        )));
    }
    let nodes = model.context.expectation_nodes(context_order);
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
    let mut expected = vec![0.0; grid_size];
    let mut sigma_hat = f64::INFINITY;
    let mut gradient_bound: f64 = 0.0;
    let mut choice_curv: f64 = f64::NEG_INFINITY;
    let mut intercept: f64 = f64::INFINITY;
    let mut omega_curv: f64 = f64::NEG_INFINITY;
    let c = &model.allocation;
    for &(d, w) in &nodes {
        let reports = grid
            .iter()
            .map(|&p| mean_field_report(p, d, model))
            .collect::<Result<Vec<_>>>()?;
        for (acc, r) in expected.iter_mut().zip(&reports) {
            *acc += w * r.u;
            gradient_bound = gradient_bound.max(r.u_prime.abs());
        }
        for pair in reports.windows(2) {
            sigma_hat = sigma_hat.min(-(pair[1].u_prime - pair[0].u_prime) / step);
        }
        let earnings: Vec<f64> = reports
            .iter()
            .map(|r| model.earning.earning_at_ratio(r.p, d / r.mu, c))
            .collect();
        let x_lo = earnings.iter().cloned().fold(f64::INFINITY, f64::min);
        let x_hi = earnings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let a = model.choice.average(x_lo);
        intercept = intercept.min(a.value - a.slope * x_lo);
        for k in 0..=100 {
            let x = x_lo + (x_hi - x_lo) * k as f64 / 100.0;
            choice_curv = choice_curv.max(model.choice.average(x).curvature);
        }
        let r_lo = reports
            .iter()
            .map(|r| d / r.mu)
            .fold(f64::INFINITY, f64::min);
        let r_hi = reports
            .iter()
            .map(|r| d / r.mu)
            .fold(f64::NEG_INFINITY, f64::max);
        for k in 0..=100 {
            let x = r_lo + (r_hi - r_lo) * k as f64 / 100.0;
            omega_curv = omega_curv.max(c.curvature(x));
        }
    }
    let worst = expected
        .windows(3)
        .map(|t| t[0] - 2.0 * t[1] + t[2])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityReport {
        pass: worst < 0.0,
        worst_second_difference: worst,
        grid,
        expected_utility: expected,
        sigma_hat,
        gradient_bound,
        premises: PremiseCheck {
            choice_curvature_max: choice_curv,
            tangent_intercept_min: intercept,
            allocation_curvature_max: omega_curv,
            choice_concave: choice_curv < 0.0,
            tangent_condition: intercept >= 0.0,
            allocation_concave: omega_curv < 0.0,
        },
    })
}
