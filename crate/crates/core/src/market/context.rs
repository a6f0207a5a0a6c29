//! Daily context: the scaled mean demand d_a and the realized demand D.

use rand::Rng;
use rand_distr::{Beta, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemandMean {
    Beta { a: f64, b: f64 },
    PointMass { d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DemandSampler {
    /// D ~ Poisson(n d).
    #[default]
    Poisson,
    /// D = round(n d).
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextModel {
    pub demand_mean: DemandMean,
    pub sampler: DemandSampler,
}

impl Default for ContextModel {
    fn default() -> Self {
        ContextModel {
            demand_mean: DemandMean::Beta { a: 15.0, b: 35.0 },
            sampler: DemandSampler::Poisson,
        }
    }
}

impl ContextModel {
    pub fn fixed(d: f64) -> Self {
        ContextModel {
            demand_mean: DemandMean::PointMass { d },
            sampler: DemandSampler::Poisson,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.demand_mean {
            DemandMean::Beta { a, b } if a > 0.0 && b > 0.0 => Ok(()),
            DemandMean::PointMass { d } if d > 0.0 && d.is_finite() => Ok(()),
            other => Err(Error::Config(format!(
                "invalid demand-mean distribution {other:?}"
            ))),
        }
    }

    pub fn sample_mean<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.demand_mean {
            DemandMean::PointMass { d } => d,
            DemandMean::Beta { a, b } => Beta::new(a, b)
                .expect("validated beta parameters")
                .sample(rng),
        }
    }

    /// Realized demand for `n` suppliers; E[D / n] = d for both samplers.
    pub fn sample_demand<R: Rng + ?Sized>(&self, n: u64, d: f64, rng: &mut R) -> u64 {
        let lambda = n as f64 * d;
        match self.sampler {
            DemandSampler::Deterministic => lambda.round() as u64,
            DemandSampler::Poisson => {
                if lambda <= 0.0 {
                    0
                } else {
                    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
                }
            }
        }
    }

    /// Nodes and probability weights for E_d[·] over the demand-mean
    /// distribution: Gauss-Legendre on [0, 1] against the Beta density, or a
    /// single node for a point mass. Weights sum to one.
    pub fn expectation_nodes(&self, order: usize) -> Vec<(f64, f64)> {
        match self.demand_mean {
            DemandMean::PointMass { d } => vec![(d, 1.0)],
            DemandMean::Beta { a, b } => {
                let rule = Rule::gauss_legendre(order, 0.0, 1.0);
                let ln_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
                let mut nodes: Vec<(f64, f64)> = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| {
                        let pdf = (ln_norm + (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p()).exp();
                        (x, w * pdf)
                    })
                    .filter(|&(_, w)| w > 0.0)
                    .collect();
                let total: f64 = nodes.iter().map(|n| n.1).sum();
                for n in &mut nodes {
                    n.1 /= total;
                }
                nodes
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beta_nodes_reproduce_moments() {
        let c = ContextModel::default();
        let nodes = c.expectation_nodes(256);
        let m1: f64 = nodes.iter().map(|(x, w)| x * w).sum();
        let m2: f64 = nodes.iter().map(|(x, w)| x * x * w).sum();
        assert!((m1 - 0.3).abs() < 1e-12);
        let var = 15.0 * 35.0 / (50.0 * 50.0 * 51.0);
        assert!((m2 - m1 * m1 - var).abs() < 1e-12);
    }

    #[test]
    fn demand_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = ContextModel::fixed(0.4);
        let reps = 2000;
        let mean: f64 = (0..reps)
            .map(|_| c.sample_demand(1000, 0.4, &mut rng) as f64 / 1000.0)
            .sum::<f64>()
            / reps as f64;
        // sd of the mean is sqrt(0.4/1000/2000) ≈ 4.5e-4
        assert!((mean - 0.4).abs() < 2e-3, "{mean}");
        let det = ContextModel {
            sampler: DemandSampler::Deterministic,
            ..c
        };
        assert_eq!(det.sample_demand(1000, 0.4, &mut rng), 400);
    }

    #[test]
    fn beta_draws_match_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = ContextModel::default();
        let mean: f64 = (0..20000).map(|_| c.sample_mean(&mut rng)).sum::<f64>() / 20000.0;
        assert!((mean - 0.3).abs() < 3e-3);
    }
}
