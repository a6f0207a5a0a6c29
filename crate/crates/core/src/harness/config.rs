use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ContextModel, EarningFunction, MarketConfig, PaymentInterval, RiskBeta};
use crate::policy::{GradientSource, LocalSettings};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Local,
    Global,
    Oracle,
}

/// Which utility the in-sample regret charges for the local learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RegretMode {
    /// u_{d_t}(p_t): the utility of the unperturbed payment.
    #[default]
    MeanField,
    /// u_{d_t}(p_t, ζ): includes the cost of randomizing payments.
    ZetaInclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: MarketConfig,
    pub method: Method,
    pub horizon: u64,
    pub replications: u64,
    /// Exploration lengths swept by the global baseline.
    pub explore_t: Vec<u64>,
    pub local: LocalSettings,
    pub seed: u64,
    pub gradient_source: GradientSource,
    pub regret_mode: RegretMode,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            model: MarketConfig::default(),
            method: Method::Local,
            horizon: 200,
            replications: 200,
            explore_t: (2..=10).map(|k| 20 * k).collect(),
            local: LocalSettings::default(),
            seed: 20_240_601,
            gradient_source: GradientSource::Simulated,
            regret_mode: RegretMode::MeanField,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub const PRESETS: [&str; 4] = ["fig2", "fig3", "sec6", "sec6-surge"];

impl ExperimentConfig {
    /// fig2: fixed scaled demand 0.4, curves and single days.
    /// fig3: beta contexts, unbounded payments, local learner.
    /// sec6: beta contexts, payments in [5, 60], local vs global.
    /// sec6-surge: sec6 with the ratio surge multiplier.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig::default();
        match name {
            "fig2" => Ok(ExperimentConfig {
                model: MarketConfig {
                    context: ContextModel::fixed(0.4),
                    ..MarketConfig::default()
                },
                ..base
            }),
            "fig3" => Ok(ExperimentConfig {
                model: MarketConfig {
                    interval: PaymentInterval::unbounded(),
                    ..MarketConfig::default()
                },
                ..base
            }),
            "sec6" => Ok(base),
            "sec6-surge" => Ok(ExperimentConfig {
                model: MarketConfig {
                    earning: EarningFunction::surge_default(),
                    ..MarketConfig::default()
                },
                ..base
            }),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.model.validate()?;
        if self.horizon == 0 || self.replications == 0 {
            return Err(Error::Config(
                "horizon and replications must be positive".into(),
            ));
        }
        if let Some(&t) = self.explore_t.iter().find(|&&t| t < 10 || t > self.horizon) {
            return Err(Error::Config(format!(
                "exploration length {t} must lie in [10, horizon = {}]",
                self.horizon
            )));
        }
        if !(self.local.eta > 0.0) || !(self.local.p1 > self.model.effective_zeta()) {
            return Err(Error::Config(
                "local learner needs eta > 0 and p1 > zeta".into(),
            ));
        }
        Ok(())
    }

    pub fn apply_surge(&mut self) {
        self.model.earning = EarningFunction::surge_default();
    }

    pub fn apply_risk(&mut self, name: &str) -> Result<()> {
        self.model.earning = EarningFunction::Risk {
            beta: RiskBeta::from_name(name)?,
        };
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let c = ExperimentConfig::preset(name).unwrap();
            c.validate().unwrap();
            let back: ExperimentConfig = serde_json::from_str(&c.to_json().unwrap()).unwrap();
            assert_eq!(back, c);
        }
        assert!(ExperimentConfig::preset("fig9").is_err());
    }

    #[test]
    fn rejects_bad_fields() {
        let c = ExperimentConfig {
            explore_t: vec![5],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            schema_version: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let text =
            ExperimentConfig::default()
                .to_json()
                .unwrap()
                .replacen('{', "{\"bogus\": 1,", 1);
        assert!(serde_json::from_str::<ExperimentConfig>(&text).is_err());
    }
}
