//! Primitive curves and distributions of the market.

pub mod allocation;
pub mod choice;
pub mod config;
pub mod context;
pub mod earning;
pub mod revenue;

pub use allocation::AllocationCurve;
pub use choice::{AverageChoice, ChoiceFamily, FeatureDistribution, Response};
pub use config::{MarketConfig, PaymentInterval, ZetaSchedule};
pub use context::{ContextModel, DemandMean, DemandSampler};
pub use earning::{EarningFunction, RiskBeta, SurgeMultiplier};
pub use revenue::RevenueCurve;
