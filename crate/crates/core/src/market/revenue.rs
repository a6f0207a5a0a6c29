use serde::{Deserialize, Serialize};

use super::allocation::AllocationCurve;

/// Linear revenue: r(x) = γ ω(x) per supplier, R(d, t) = r(d/t) t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueCurve {
    pub gamma: f64,
}

impl Default for RevenueCurve {
    fn default() -> Self {
        RevenueCurve { gamma: 100.0 }
    }
}

impl RevenueCurve {
    pub fn r(&self, curve: &AllocationCurve, x: f64) -> f64 {
        self.gamma * curve.value(x)
    }

    pub fn r_prime(&self, curve: &AllocationCurve, x: f64) -> f64 {
        self.gamma * curve.slope(x)
    }

    /// Realized revenue for `demand` requests and `active` suppliers. Zero
    /// when nobody is active.
    pub fn total(&self, curve: &AllocationCurve, demand: f64, active: f64) -> f64 {
        if active <= 0.0 {
            0.0
        } else {
            self.r(curve, demand / active) * active
        }
    }
}
