//! Generalized earning functions θ(p, q): what a supplier anticipates earning
//! per period at base payment `p` when served at rate `q`.

use serde::{Deserialize, Serialize};

use super::allocation::AllocationCurve;
use crate::error::{Error, Result};

/// Concave, increasing map β with β(0) = 0 used by risk-averse suppliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RiskBeta {
    Identity,
    /// β(p) = scale · (p / scale)^exponent, exponent in (0, 1].
    Power {
        exponent: f64,
        scale: f64,
    },
    /// β(p) = scale · ln(1 + p / scale).
    Log {
        scale: f64,
    },
}

impl RiskBeta {
    /// Named presets: "identity", "sqrt", "log".
    pub fn from_name(name: &str) -> Result<RiskBeta> {
        match name {
            "identity" => Ok(RiskBeta::Identity),
            "sqrt" => Ok(RiskBeta::Power {
                exponent: 0.5,
                scale: 20.0,
            }),
            "log" => Ok(RiskBeta::Log { scale: 20.0 }),
            other => Err(Error::Config(format!(
                "unknown risk profile '{other}' (expected identity, sqrt or log)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RiskBeta::Identity => Ok(()),
            RiskBeta::Power { exponent, scale }
                if exponent > 0.0 && exponent <= 1.0 && scale > 0.0 =>
            {
                Ok(())
            }
            RiskBeta::Log { scale } if scale > 0.0 => Ok(()),
            other => Err(Error::Config(format!("invalid risk profile {other:?}"))),
        }
    }

    pub fn value(&self, p: f64) -> f64 {
        match *self {
            RiskBeta::Identity => p,
            RiskBeta::Power { exponent, scale } => scale * (p.max(0.0) / scale).powf(exponent),
            RiskBeta::Log { scale } => scale * (p / scale).ln_1p(),
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        match *self {
            RiskBeta::Identity => 1.0,
            RiskBeta::Power { exponent, scale } => {
                exponent * (p.max(f64::MIN_POSITIVE) / scale).powf(exponent - 1.0)
            }
            RiskBeta::Log { scale } => 1.0 / (1.0 + p / scale),
        }
    }
}

/// Committed surge multiplier s(x) as a function of the demand/supply ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurgeMultiplier {
    /// s ≡ 1.
    Unit,
    /// s(x) = x / ω(x): suppliers are paid per unit of demand per server,
    /// whether or not it is served.
    Ratio,
    Constant {
        value: f64,
    },
}

impl SurgeMultiplier {
    pub fn value(&self, curve: &AllocationCurve, x: f64) -> f64 {
        match *self {
            SurgeMultiplier::Unit => 1.0,
            SurgeMultiplier::Constant { value } => value,
            SurgeMultiplier::Ratio => {
                if x < 1e-8 {
                    1.0
                } else {
                    x / curve.value(x)
                }
            }
        }
    }

    pub fn derivative(&self, curve: &AllocationCurve, x: f64) -> f64 {
        match *self {
            SurgeMultiplier::Unit | SurgeMultiplier::Constant { .. } => 0.0,
            SurgeMultiplier::Ratio => {
                if x < 1e-8 {
                    return 0.0;
                }
                let w = curve.value(x);
                (w - x * curve.slope(x)) / (w * w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum EarningFunction {
    /// θ(p, q) = p q.
    #[default]
    Identity,
    /// θ(p, q) = β(p) q. The platform still pays p per unit served.
    Risk { beta: RiskBeta },
    /// θ(p, q) = p q s(ω⁻¹(q)). The platform pays p s(x) per unit served.
    Surge { multiplier: SurgeMultiplier },
}

impl EarningFunction {
    pub fn surge_default() -> Self {
        EarningFunction::Surge {
            multiplier: SurgeMultiplier::Ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EarningFunction::Risk { beta } => beta.validate(),
            EarningFunction::Surge {
                multiplier: SurgeMultiplier::Constant { value },
            } if !(*value > 0.0) => Err(Error::Config(format!(
                "constant surge multiplier must be positive, got {value}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_surge(&self) -> bool {
        matches!(self, EarningFunction::Surge { .. })
    }

    /// θ(p, q).
    pub fn earning(&self, p: f64, q: f64, curve: &AllocationCurve) -> Result<f64> {
        match *self {
            EarningFunction::Identity => Ok(p * q),
            EarningFunction::Risk { beta } => Ok(beta.value(p) * q),
            EarningFunction::Surge { multiplier } => {
                let x = curve.omega_inverse(q)?;
                Ok(p * q * multiplier.value(curve, x))
            }
        }
    }

    /// (∂₁θ, ∂₂θ) at (p, q).
    pub fn earning_partials(&self, p: f64, q: f64, curve: &AllocationCurve) -> Result<(f64, f64)> {
        match *self {
            EarningFunction::Identity => Ok((q, p)),
            EarningFunction::Risk { beta } => Ok((beta.derivative(p) * q, beta.value(p))),
            EarningFunction::Surge { .. } => {
                let x = curve.omega_inverse(q)?;
                Ok(self.partials_at_ratio(p, x, curve))
            }
        }
    }

    /// θ(p, ω(x)) without inverting ω. Exact for the ratio multiplier:
    /// θ(p, ω(x)) = p x.
    pub fn earning_at_ratio(&self, p: f64, x: f64, curve: &AllocationCurve) -> f64 {
        match *self {
            EarningFunction::Identity => p * curve.value(x),
            EarningFunction::Risk { beta } => beta.value(p) * curve.value(x),
            EarningFunction::Surge {
                multiplier: SurgeMultiplier::Ratio,
            } => p * x,
            EarningFunction::Surge { multiplier } => {
                p * curve.value(x) * multiplier.value(curve, x)
            }
        }
    }

    /// (∂₁θ, ∂₂θ) at (p, ω(x)).
    pub fn partials_at_ratio(&self, p: f64, x: f64, curve: &AllocationCurve) -> (f64, f64) {
        let q = curve.value(x);
        match *self {
            EarningFunction::Identity => (q, p),
            EarningFunction::Risk { beta } => (beta.derivative(p) * q, beta.value(p)),
            EarningFunction::Surge {
                multiplier: SurgeMultiplier::Ratio,
            } => (x, p / curve.slope(x)),
            EarningFunction::Surge { multiplier } => {
                let s = multiplier.value(curve, x);
                let ds = multiplier.derivative(curve, x);
                (q * s, p * (s + q * ds / curve.slope(x)))
            }
        }
    }

    /// Per-unit multiplier the platform applies to the base payment at
    /// settlement.
    pub fn payment_multiplier(&self, x: f64, curve: &AllocationCurve) -> f64 {
        match self {
            EarningFunction::Surge { multiplier } => multiplier.value(curve, x),
            _ => 1.0,
        }
    }

    pub fn payment_multiplier_slope(&self, x: f64, curve: &AllocationCurve) -> f64 {
        match self {
            EarningFunction::Surge { multiplier } => multiplier.derivative(curve, x),
            _ => 0.0,
        }
    }
}
