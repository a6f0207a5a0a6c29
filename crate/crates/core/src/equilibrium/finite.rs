//! Finite-market oracles: expectations over a Binomial(n, μ) supply count.

use statrs::function::gamma::ln_gamma;

use super::{check_inputs, solve_fixed_point, EquilibriumPoint, MU_FLOOR};
use crate::error::{Error, Result};
use crate::market::MarketConfig;

/// Largest n for which the binomial sums are enumerated.
pub const EXACT_LIMIT: u64 = 10_000;

fn binomial_pmf(n: u64, mu: f64) -> Vec<f64> {
    let nf = n as f64;
    if mu <= 0.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if mu >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[n as usize] = 1.0;
        return v;
    }
    let (lp, lq) = (mu.ln(), (-mu).ln_1p());
    let lnn = ln_gamma(nf + 1.0);
    (0..=n)
        .map(|k| {
            let k = k as f64;
            (lnn - ln_gamma(k + 1.0) - ln_gamma(nf - k + 1.0) + k * lp + (nf - k) * lq).exp()
        })
        .collect()
}

fn check_exact(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            n: n as usize,
            limit: EXACT_LIMIT as usize,
        });
    }
    Ok(())
}

/// E[Ω(demand, X)] for X ~ Binomial(n, μ), Ω(·, 0) at saturation.
/// `demand` is the total (unscaled) demand.
pub fn finite_n_q(mu: f64, demand: f64, n: u64, model: &MarketConfig) -> Result<f64> {
    check_exact(n)?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::domain("mu", mu, "0 <= mu <= 1"));
    }
    let c = &model.allocation;
    Ok(binomial_pmf(n, mu)
        .iter()
        .enumerate()
        .map(|(k, &w)| w * c.pre_limit(demand, k as f64))
        .sum())
}

/// d/dμ finite_n_q through the exponential-family identity
/// d/dμ E[g(X)] = η'(μ) Cov(g(X), X), η'(μ) = 1/(μ(1−μ)).
pub fn stein_dq(mu: f64, demand: f64, n: u64, model: &MarketConfig) -> Result<f64> {
    check_exact(n)?;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain("mu", mu, "0 < mu < 1"));
    }
    let c = &model.allocation;
    let mean = n as f64 * mu;
    let cov: f64 = binomial_pmf(n, mu)
        .iter()
        .enumerate()
        .map(|(k, &w)| w * c.pre_limit(demand, k as f64) * (k as f64 - mean))
        .sum();
    Ok(cov / (mu * (1.0 - mu)))
}

/// Equilibrium with finite-market beliefs: suppliers anticipate the
/// allocation E[Ω(n d, X)], X ~ Binomial(n, μ), instead of ω(d/μ).
/// Identity and risk earnings only; surge beliefs need ω⁻¹ of a mean.
pub fn solve_mu_finite_n(
    p: f64,
    zeta: f64,
    d: f64,
    model: &MarketConfig,
) -> Result<EquilibriumPoint> {
    check_inputs(p, zeta, d)?;
    check_exact(model.n)?;
    if model.earning.is_surge() {
        return Err(Error::Config(
            "finite-n beliefs are not defined for surge earnings".into(),
        ));
    }
    let demand = model.n as f64 * d;
    let belief = |m: f64| finite_n_q(m, demand, model.n, model).expect("checked");
    let c = &model.allocation;
    let psi = |m: f64| {
        let q = belief(m);
        let e = &model.earning;
        let f = |pp: f64| {
            model
                .choice
                .mean_activation(e.earning(pp, q, c).expect("identity or risk"))
        };
        if zeta == 0.0 {
            f(p)
        } else {
            0.5 * (f(p + zeta) + f(p - zeta))
        }
    };
    let root = solve_fixed_point(psi, MU_FLOOR, 1.0);
    Ok(EquilibriumPoint {
        mu: root.mu,
        q: belief(root.mu),
        residual: root.residual,
        iterations: root.iterations,
        degenerate: root.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_mu;
    use crate::market::ContextModel;

    fn model() -> MarketConfig {
        MarketConfig::default()
    }

    #[test]
    fn degenerate_binomial() {
        let m = model();
        let v = finite_n_q(1.0, 0.5, 1, &m).unwrap();
        assert_eq!(v, m.allocation.value(0.5));
    }

    #[test]
    fn decreasing_in_mu() {
        let m = model();
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let v = finite_n_q(k as f64 * 0.05, 16.0, 40, &m).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn approaches_mean_field_limit() {
        let m = model();
        let n = 10_000;
        let v = finite_n_q(0.5, 0.4 * n as f64, n, &m).unwrap();
        let limit = m.allocation.value(0.8);
        assert!((v - limit).abs() < 1e-4, "{v} {limit}");
    }

    #[test]
    fn stein_matches_finite_difference() {
        let m = model();
        let h = 1e-6;
        let fd = (finite_n_q(0.5 + h, 16.0, 40, &m).unwrap()
            - finite_n_q(0.5 - h, 16.0, 40, &m).unwrap())
            / (2.0 * h);
        let s = stein_dq(0.5, 16.0, 40, &m).unwrap();
        assert!((s - fd).abs() < 1e-7, "{s} {fd}");
        assert!(s <= 0.0);
    }

    #[test]
    fn stein_vanishes_when_saturated() {
        let m = model();
        let s = stein_dq(0.5, 1e6, 40, &m).unwrap();
        assert!(s.abs() < 1e-6, "{s}");
    }

    #[test]
    fn refuses_large_or_boundary() {
        let m = model();
        assert!(matches!(
            finite_n_q(0.5, 1.0, 20_000, &m),
            Err(Error::TooLarge { .. })
        ));
        assert!(stein_dq(0.0, 1.0, 10, &m).is_err());
        assert!(stein_dq(1.0, 1.0, 10, &m).is_err());
    }

    #[test]
    fn finite_beliefs_converge_to_mean_field() {
        let mut m = MarketConfig {
            context: ContextModel::fixed(0.4),
            ..Default::default()
        };
        let mf = solve_mu(17.0, 0.0, 0.4, &m).unwrap().mu;
        let mut prev = f64::INFINITY;
        for n in [50, 500, 5000] {
            m.n = n;
            let fin = solve_mu_finite_n(17.0, 0.0, 0.4, &m).unwrap();
            let gap = (fin.mu - mf).abs();
            assert!(gap < prev, "n={n} gap={gap}");
            prev = gap;
        }
        assert!(prev < 1e-3);
    }
}
