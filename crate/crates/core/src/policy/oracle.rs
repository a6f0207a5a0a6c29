use serde::{Deserialize, Serialize};

use crate::equilibrium::{concavity_diagnostic, expected_utility};
use crate::error::Result;
use crate::market::MarketConfig;

const CONTEXT_ORDER: usize = 256;
const TOLERANCE: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    GoldenSection,
    /// Concavity could not be confirmed; 4001-point grid search.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePayment {
    pub p_star: f64,
    pub u_star: f64,
    pub method: OracleMethod,
}

/// Search range for an interval that may be unbounded: payments beyond the
/// per-unit revenue γ lose money, and p must exceed the perturbation.
fn search_range(model: &MarketConfig) -> (f64, f64) {
    let lo = model
        .interval
        .lower
        .unwrap_or(model.effective_zeta() + 1e-6);
    let hi = model.interval.upper.unwrap_or(model.revenue.gamma);
    (lo, hi)
}

/// argmax over I of E_d[u_d(p)] using a 256-node context rule.
pub fn oracle_optimal_payment(model: &MarketConfig) -> Result<OraclePayment> {
    let (lo, hi) = search_range(model);
    let nodes = model.context.expectation_nodes(CONTEXT_ORDER);
    let u = |p: f64| expected_utility(p, model, &nodes);
    let concave = concavity_diagnostic(model, lo, hi, 41, 16)?.pass;
    if !concave {
        eprintln!("warning: utility not verified concave on [{lo}, {hi}]; using grid search");
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..=4000 {
            let p = lo + (hi - lo) * k as f64 / 4000.0;
            let v = u(p)?;
            if v > best.1 {
                best = (p, v);
            }
        }
        return Ok(OraclePayment {
            p_star: best.0,
            u_star: best.1,
            method: OracleMethod::Grid,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = u(c)?;
    let mut fd = u(d)?;
    while b - a > TOLERANCE {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = u(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = u(d)?;
        }
    }
    let p_star = 0.5 * (a + b);
    Ok(OraclePayment {
        p_star,
        u_star: u(p_star)?,
        method: OracleMethod::GoldenSection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{mean_field_report, utility};
    use crate::market::{ContextModel, PaymentInterval};

    #[test]
    fn point_mass_oracle_matches_grid_and_first_order_condition() {
        let m = MarketConfig {
            context: ContextModel::fixed(0.4),
            interval: PaymentInterval::new(10.0, 30.0),
            ..Default::default()
        };
        let o = oracle_optimal_payment(&m).unwrap();
        assert_eq!(o.method, OracleMethod::GoldenSection);
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..10_000 {
            let p = 10.0 + 20.0 * k as f64 / 9999.0;
            let v = utility(p, 0.4, &m).unwrap();
            if v > best.1 {
                best = (p, v);
            }
        }
        assert!((o.p_star - best.0).abs() <= 2.0 * 20.0 / 9999.0);
        assert!(o.u_star >= best.1 - 1e-12);
        let slope = mean_field_report(o.p_star, 0.4, &m).unwrap().u_prime;
        assert!(slope.abs() < 1e-6, "{slope}");
    }
}
