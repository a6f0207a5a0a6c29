//! Supplier choice functions f_b and the distribution of the private feature B.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use libm::erfc;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Response {
    /// f_b(x) = 1 / (1 + exp(−α (x − b))).
    Logistic { alpha: f64 },
    /// f_b(x) = 1{x ≥ b}, the α → ∞ limit. Not twice differentiable per
    /// supplier; only the averaged curve is smooth.
    Threshold,
}

/// Distribution of the private break-even feature B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureDistribution {
    /// log(B / median) ~ N(0, sigma²).
    LogNormal {
        median: f64,
        sigma: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceFamily {
    pub response: Response,
    pub outside_option: FeatureDistribution,
}

impl Default for ChoiceFamily {
    fn default() -> Self {
        ChoiceFamily {
            response: Response::Logistic { alpha: 1.0 },
            outside_option: FeatureDistribution::LogNormal {
                median: 20.0,
                sigma: 1.0,
            },
        }
    }
}

/// The averaged choice curve f̄(x) = E_B[f_B(x)] and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageChoice {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Standard-logistic noise integrated on [−40, 40] (tail mass < 1e-17) with
/// 80 panels of 8-point Gauss-Legendre, weights pre-multiplied by the density.
fn logistic_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut rule = Rule::composite(8, 80, -40.0, 40.0);
        for (w, &e) in rule.weights.iter_mut().zip(&rule.nodes) {
            let a = (-e.abs()).exp();
            *w *= a / ((1.0 + a) * (1.0 + a));
        }
        rule
    })
}

impl FeatureDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FeatureDistribution::LogNormal { median, sigma } if median > 0.0 && sigma > 0.0 => {
                Ok(())
            }
            FeatureDistribution::Uniform { low, high } if high > low => Ok(()),
            other => Err(Error::Config(format!(
                "invalid outside-option distribution {other:?}"
            ))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FeatureDistribution::LogNormal { median, sigma } => {
                let g: f64 = StandardNormal.sample(rng);
                median * (sigma * g).exp()
            }
            FeatureDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }

    pub fn cdf(&self, b: f64) -> f64 {
        match *self {
            FeatureDistribution::LogNormal { median, sigma } => {
                if b <= 0.0 {
                    0.0
                } else {
                    let z = (b / median).ln() / sigma;
                    0.5 * erfc(-z * FRAC_1_SQRT_2)
                }
            }
            FeatureDistribution::Uniform { low, high } => {
                ((b - low) / (high - low)).clamp(0.0, 1.0)
            }
        }
    }

    /// (F, F', F'') at `b`.
    fn cdf_derivs(&self, b: f64) -> (f64, f64, f64) {
        match *self {
            FeatureDistribution::LogNormal { median, sigma } => {
                if b <= 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let z = (b / median).ln() / sigma;
                let cdf = 0.5 * erfc(-z * FRAC_1_SQRT_2);
                let pdf = (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma * b);
                let dpdf = -pdf * (1.0 + z / sigma) / b;
                (cdf, pdf, dpdf)
            }
            FeatureDistribution::Uniform { low, high } => {
                if b <= low {
                    (0.0, 0.0, 0.0)
                } else if b >= high {
                    (1.0, 0.0, 0.0)
                } else {
                    ((b - low) / (high - low), 1.0 / (high - low), 0.0)
                }
            }
        }
    }
}

impl ChoiceFamily {
    pub fn validate(&self) -> Result<()> {
        if let Response::Logistic { alpha } = self.response {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Config(format!(
                    "logistic sensitivity must be > 0, got {alpha}"
                )));
            }
        }
        self.outside_option.validate()
    }

    /// Activation probability f_b(x) of a supplier with feature `b` facing
    /// expected earnings `x`.
    pub fn choice_prob(&self, b: f64, x: f64) -> f64 {
        match self.response {
            Response::Logistic { alpha } => logistic(alpha * (x - b)),
            Response::Threshold => {
                if x >= b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// f'_b(x).
    pub fn choice_slope(&self, b: f64, x: f64) -> f64 {
        match self.response {
            Response::Logistic { alpha } => {
                let s = logistic(alpha * (x - b));
                alpha * s * (1.0 - s)
            }
            Response::Threshold => 0.0,
        }
    }

    /// f̄(x) = E_B[f_B(x)].
    pub fn mean_activation(&self, x: f64) -> f64 {
        match self.response {
            Response::Logistic { alpha } => {
                let rule = logistic_rule();
                let inv = 1.0 / alpha;
                let mut acc = 0.0;
                for (&e, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let b = x - e * inv;
                    if b > 0.0
                        || !matches!(self.outside_option, FeatureDistribution::LogNormal { .. })
                    {
                        acc += w * self.outside_option.cdf(b);
                    }
                }
                acc
            }
            Response::Threshold => self.outside_option.cdf(x),
        }
    }

    /// f̄ together with f̄' and f̄''. Each is the exact derivative of the same
    /// quadrature sum, so finite differences of `mean_activation` agree with
    /// `slope` to truncation error.
    pub fn average(&self, x: f64) -> AverageChoice {
        match self.response {
            Response::Logistic { alpha } => {
                let rule = logistic_rule();
                let inv = 1.0 / alpha;
                let (mut v, mut s, mut c) = (0.0, 0.0, 0.0);
                for (&e, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (f0, f1, f2) = self.outside_option.cdf_derivs(x - e * inv);
                    v += w * f0;
                    s += w * f1;
                    c += w * f2;
                }
                AverageChoice {
                    value: v,
                    slope: s,
                    curvature: c,
                }
            }
            Response::Threshold => {
                let (v, s, c) = self.outside_option.cdf_derivs(x);
                AverageChoice {
                    value: v,
                    slope: s,
                    curvature: c,
                }
            }
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
