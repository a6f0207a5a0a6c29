//! Regular allocation functions: the per-supplier service rate as a function
//! of the demand-to-supply ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limiting allocation function ω and its pre-limit Ω(d, t) = ω(d/t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AllocationCurve {
    /// Parallel M/M/1 queues holding at most `capacity - 1` jobs each:
    /// ω(x) = (x − x^L)/(1 − x^L), ω(1) = 1 − 1/L.
    FiniteCapacityQueue { capacity: u32 },
    /// Infinite-buffer limit, ω(x) = min(x, 1). Smooth only below x = 1.
    Uncongested,
}

impl Default for AllocationCurve {
    fn default() -> Self {
        AllocationCurve::FiniteCapacityQueue { capacity: 8 }
    }
}

impl AllocationCurve {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AllocationCurve::FiniteCapacityQueue { capacity } if capacity < 2 => {
                Err(Error::Config(format!(
                    "queue capacity L must be at least 2, got {capacity}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// lim_{x→∞} ω(x).
    pub fn saturation(&self) -> f64 {
        1.0
    }

    pub fn omega(&self, x: f64) -> Result<f64> {
        check_ratio(x)?;
        Ok(self.value(x))
    }

    pub fn omega_prime(&self, x: f64) -> Result<f64> {
        check_ratio(x)?;
        Ok(self.slope(x))
    }

    /// ω(x) without the domain check. `x` must be non-negative.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            AllocationCurve::FiniteCapacityQueue { capacity } => {
                let l = capacity as usize;
                if x.is_infinite() {
                    return 1.0;
                }
                if x <= 1.0 {
                    x * geometric(x, l - 1) / geometric(x, l)
                } else {
                    // 1 − ω = y^{L−1}/S_L(y) is tiny and monotone, so
                    // subtracting it keeps ω monotone after rounding.
                    let y = 1.0 / x;
                    1.0 - y.powi(l as i32 - 1) / geometric(y, l)
                }
            }
            AllocationCurve::Uncongested => x.min(1.0),
        }
    }

    /// ω'(x). Written as P(x)/S_L(x)² so it stays positive and free of
    /// cancellation on both sides of x = 1.
    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            AllocationCurve::FiniteCapacityQueue { capacity } => {
                let l = capacity as usize;
                if x.is_infinite() {
                    return 0.0;
                }
                if x <= 1.0 {
                    let s = geometric(x, l);
                    ramp(x, l) / (s * s)
                } else {
                    let y = 1.0 / x;
                    let s = geometric(y, l);
                    y.powi(l as i32) * ramp_rev(y, l) / (s * s)
                }
            }
            AllocationCurve::Uncongested => {
                if x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// ω''(x).
    pub fn curvature(&self, x: f64) -> f64 {
        match *self {
            AllocationCurve::FiniteCapacityQueue { capacity } => {
                let l = capacity as usize;
                if x.is_infinite() {
                    return 0.0;
                }
                if x <= 1.0 {
                    let s = geometric(x, l);
                    let ds = geometric_deriv(x, l);
                    let p = ramp(x, l);
                    let dp = ramp_deriv(x, l);
                    (dp * s - 2.0 * p * ds) / (s * s * s)
                } else {
                    let y = 1.0 / x;
                    let s = geometric(y, l);
                    let ds = geometric_deriv(y, l);
                    let p = ramp_rev(y, l);
                    let dp = ramp_rev_deriv(y, l);
                    let lf = l as f64;
                    -y.powi(l as i32 + 1) * ((lf * p + y * dp) * s - 2.0 * y * p * ds) / (s * s * s)
                }
            }
            AllocationCurve::Uncongested => 0.0,
        }
    }

    /// Pre-limit allocation Ω(d, t) for demand `d` and `t` active suppliers.
    /// Ω(d, 0) is the saturation level; it never reaches utility since no one
    /// is active.
    pub fn pre_limit(&self, demand: f64, active: f64) -> f64 {
        if active <= 0.0 {
            self.saturation()
        } else {
            self.value(demand / active)
        }
    }

    /// Solves ω(x) = q by bisection.
    pub fn omega_inverse(&self, q: f64) -> Result<f64> {
        let sat = self.saturation();
        if !(q > 0.0 && q < sat) {
            return Err(Error::domain("allocation rate q", q, "0 < q < saturation"));
        }
        if let AllocationCurve::Uncongested = self {
            return Ok(q);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.value(hi) < q {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numerical(format!("cannot bracket ω⁻¹({q})")));
            }
        }
        let mut best = (f64::INFINITY, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.value(mid);
            let gap = (v - q).abs();
            if gap < best.0 {
                best = (gap, mid);
            }
            if gap == 0.0 || mid <= lo || mid >= hi {
                break;
            }
            if v < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(best.1)
    }
}

fn check_ratio(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("demand-to-supply ratio x", x, "x ≥ 0"))
    }
}

/// S_k(x) = 1 + x + … + x^{k−1}.
fn geometric(x: f64, k: usize) -> f64 {
    (0..k).fold(0.0, |acc, _| acc * x + 1.0)
}

fn geometric_deriv(x: f64, k: usize) -> f64 {
    // Σ_{j=1}^{k−1} j x^{j−1}
    (1..k).rev().fold(0.0, |acc, j| acc * x + j as f64)
}

/// P(x) = Σ_{j=0}^{L−2} (j+1) x^j, so that 1 − L x^{L−1} + (L−1) x^L = (1−x)² P(x).
fn ramp(x: f64, l: usize) -> f64 {
    (0..l - 1)
        .rev()
        .fold(0.0, |acc, j| acc * x + (j + 1) as f64)
}

fn ramp_deriv(x: f64, l: usize) -> f64 {
    (1..l - 1)
        .rev()
        .fold(0.0, |acc, j| acc * x + (j * (j + 1)) as f64)
}

/// P̃(y) = Σ_{k=0}^{L−2} (L−1−k) y^k, the reversed ramp used for x > 1.
fn ramp_rev(y: f64, l: usize) -> f64 {
    (0..l - 1)
        .rev()
        .fold(0.0, |acc, k| acc * y + (l - 1 - k) as f64)
}

fn ramp_rev_deriv(y: f64, l: usize) -> f64 {
    (1..l - 1)
        .rev()
        .fold(0.0, |acc, k| acc * y + (k * (l - 1 - k)) as f64)
}
