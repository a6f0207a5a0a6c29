use serde::Serialize;

/// Location and spread of a per-replication metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Stats {
        let n = values.len();
        if n == 0 {
            return Stats {
                mean: f64::NAN,
                std_error: f64::NAN,
                median: f64::NAN,
                q1: f64::NAN,
                q3: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Stats {
            mean,
            std_error: (var / n as f64).sqrt(),
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            count: n,
        }
    }
}

/// In-sample and future regret across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub in_sample: Stats,
    pub future: Stats,
}

/// (1/T) Σ_{t ≤ T} t r_t for every prefix length T.
pub fn weighted_regret_path(regrets: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    regrets
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let t = (k + 1) as f64;
            acc += t * r;
            acc / t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let s = Stats::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.q1, s.median, s.q3, s.mean), (2.0, 3.0, 4.0, 3.0));
        assert!((s.std_error - (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weighted_path() {
        assert_eq!(weighted_regret_path(&[1.0, 1.0, 1.0]), vec![1.0, 1.5, 2.0]);
    }
}
