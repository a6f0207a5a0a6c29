use serde::{Deserialize, Serialize};

use super::{AllocationCurve, ChoiceFamily, ContextModel, EarningFunction, RevenueCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ZetaSchedule {
    #[default]
    Fixed,
    /// ζ_n = ζ · n^(−exponent), 0 < exponent < 1/2.
    PowerLaw { exponent: f64 },
}

/// Payment bounds [c−, c+]; a missing side is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaymentInterval {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Default for PaymentInterval {
    fn default() -> Self {
        PaymentInterval::new(5.0, 60.0)
    }
}

impl PaymentInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        PaymentInterval {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn unbounded() -> Self {
        PaymentInterval {
            lower: None,
            upper: None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    pub fn clip(&self, p: f64) -> f64 {
        let p = self.lower.map_or(p, |c| p.max(c));
        self.upper.map_or(p, |c| p.min(c))
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower.is_none_or(|c| p >= c) && self.upper.is_none_or(|c| p <= c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub n: u64,
    pub allocation: AllocationCurve,
    pub choice: ChoiceFamily,
    pub earning: EarningFunction,
    pub revenue: RevenueCurve,
    pub context: ContextModel,
    pub zeta: f64,
    pub zeta_schedule: ZetaSchedule,
    pub interval: PaymentInterval,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            n: 10_000,
            allocation: AllocationCurve::default(),
            choice: ChoiceFamily::default(),
            earning: EarningFunction::Identity,
            revenue: RevenueCurve::default(),
            context: ContextModel::default(),
            zeta: 0.5,
            zeta_schedule: ZetaSchedule::Fixed,
            interval: PaymentInterval::default(),
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("market size n must be at least 1".into()));
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(Error::Config(format!(
                "zeta must be positive, got {}",
                self.zeta
            )));
        }
        if let ZetaSchedule::PowerLaw { exponent } = self.zeta_schedule {
            if !(exponent > 0.0 && exponent < 0.5) {
                return Err(Error::Config(format!(
                    "zeta power-law exponent must lie in (0, 0.5), got {exponent}"
                )));
            }
        }
        if let (Some(lo), Some(hi)) = (self.interval.lower, self.interval.upper) {
            if !(lo < hi) {
                return Err(Error::Config(format!(
                    "empty payment interval [{lo}, {hi}]"
                )));
            }
        }
        if let Some(lo) = self.interval.lower {
            if lo <= self.effective_zeta() {
                return Err(Error::Config(format!(
                    "payment lower bound {lo} must exceed the perturbation {}",
                    self.effective_zeta()
                )));
            }
        }
        if !(self.revenue.gamma > 0.0) {
            return Err(Error::Config("revenue gamma must be positive".into()));
        }
        self.allocation.validate()?;
        self.choice.validate()?;
        self.earning.validate()?;
        self.context.validate()
    }

    /// Perturbation magnitude actually used at market size n.
    pub fn effective_zeta(&self) -> f64 {
        match self.zeta_schedule {
            ZetaSchedule::Fixed => self.zeta,
            ZetaSchedule::PowerLaw { exponent } => self.zeta * (self.n as f64).powf(-exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        MarketConfig::default().validate().unwrap();
    }

    #[test]
    fn power_law_shrinks_zeta() {
        let m = MarketConfig {
            n: 10_000,
            zeta_schedule: ZetaSchedule::PowerLaw { exponent: 0.25 },
            ..Default::default()
        };
        assert!((m.effective_zeta() - 0.05).abs() < 1e-12);
        let bad = MarketConfig {
            zeta_schedule: ZetaSchedule::PowerLaw { exponent: 0.5 },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn clipping() {
        let i = PaymentInterval::new(5.0, 60.0);
        assert_eq!(i.clip(70.0), 60.0);
        assert_eq!(i.clip(1.0), 5.0);
        assert_eq!(PaymentInterval::unbounded().clip(-3.0), -3.0);
    }

    #[test]
    fn json_round_trip() {
        let m = MarketConfig {
            earning: EarningFunction::surge_default(),
            interval: PaymentInterval::unbounded(),
            ..Default::default()
        };
        let s = serde_json::to_string(&m).unwrap();
        let back: MarketConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
