//! Supplier-activation fixed points and mean-field analytics.

mod concavity;
mod finite;
pub(crate) mod report;

pub use concavity::{concavity_diagnostic, ConcavityReport, PremiseCheck};
pub use finite::{finite_n_q, solve_mu_finite_n, stein_dq, EXACT_LIMIT};
pub use report::{
    expected_utility, mean_field_report, perturbed_utility, utility, MeanFieldReport,
};

use crate::error::{Error, Result};
use crate::market::MarketConfig;

/// Lower end of the bisection bracket for the active fraction.
pub const MU_FLOOR: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-13;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub mu: f64,
    /// Per-supplier allocation rate implied by `mu`.
    pub q: f64,
    /// |μ − ψ(μ)|.
    pub residual: f64,
    pub iterations: usize,
    /// ψ(MU_FLOOR) < MU_FLOOR: no root in the bracket; `mu` is the floor.
    pub degenerate: bool,
}

/// Root of μ = ψ(μ) on [lo, hi] for a non-increasing ψ, by bisection on
/// h(μ) = μ − ψ(μ), which is strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    pub degenerate: bool,
}

pub fn solve_fixed_point(psi: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Root {
    let h = |m: f64| m - psi(m);
    let (mut a, mut b) = (lo, hi);
    let ha = h(a);
    if ha >= 0.0 {
        return Root {
            mu: a,
            residual: ha.abs(),
            iterations: 0,
            degenerate: ha > 0.0,
        };
    }
    let hb = h(b);
    if hb <= 0.0 {
        return Root {
            mu: b,
            residual: hb.abs(),
            iterations: 0,
            degenerate: hb < 0.0,
        };
    }
    let mut best = if -ha < hb { (a, -ha) } else { (b, hb) };
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let hm = h(m);
        if hm.abs() < best.1 {
            best = (m, hm.abs());
        }
        if hm == 0.0 || best.1 < RESIDUAL_TOL {
            break;
        }
        if hm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Root {
        mu: best.0,
        residual: best.1,
        iterations,
        degenerate: false,
    }
}

/// ψ(μ): mean activation when suppliers anticipate the allocation ω(d/μ)
/// and payments are p ± ζ with equal probability.
pub fn activation_map(model: &MarketConfig, p: f64, zeta: f64, d: f64, mu: f64) -> f64 {
    let x = d / mu;
    let e = &model.earning;
    let c = &model.allocation;
    if zeta == 0.0 {
        model.choice.mean_activation(e.earning_at_ratio(p, x, c))
    } else {
        0.5 * (model
            .choice
            .mean_activation(e.earning_at_ratio(p + zeta, x, c))
            + model
                .choice
                .mean_activation(e.earning_at_ratio(p - zeta, x, c)))
    }
}

fn check_inputs(p: f64, zeta: f64, d: f64) -> Result<()> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::domain("zeta", zeta, "zeta >= 0"));
    }
    if !(p > zeta && p.is_finite()) {
        return Err(Error::domain("payment p", p, "p > zeta"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("scaled demand d", d, "d > 0"));
    }
    Ok(())
}

/// Mean-field equilibrium active fraction at payment `p`, perturbation
/// `zeta` and scaled demand `d`.
pub fn solve_mu(p: f64, zeta: f64, d: f64, model: &MarketConfig) -> Result<EquilibriumPoint> {
    check_inputs(p, zeta, d)?;
    Ok(solve_mu_unchecked(p, zeta, d, model))
}

pub(crate) fn solve_mu_unchecked(
    p: f64,
    zeta: f64,
    d: f64,
    model: &MarketConfig,
) -> EquilibriumPoint {
    let root = solve_fixed_point(|m| activation_map(model, p, zeta, d, m), MU_FLOOR, 1.0);
    EquilibriumPoint {
        mu: root.mu,
        q: model.allocation.value(d / root.mu),
        residual: root.residual,
        iterations: root.iterations,
        degenerate: root.degenerate,
    }
}
