//! Cubic smoothing spline with the penalty chosen by generalized
//! cross-validation, and a Gaussian-kernel fallback.

use serde::Serialize;

const KERNEL_BANDWIDTH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmootherKind {
    Spline { lambda: f64, gcv: f64 },
    Kernel { bandwidth: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    pub kind: SmootherKind,
    knots: Vec<f64>,
    /// Fitted values at the knots (spline) or raw responses (kernel).
    values: Vec<f64>,
    /// Second derivatives at the knots, zero at both ends.
    curvature: Vec<f64>,
}

impl Smoother {
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            SmootherKind::Kernel { bandwidth } => {
                let (mut num, mut den) = (0.0, 0.0);
                for (&k, &y) in self.knots.iter().zip(&self.values) {
                    let z = (x - k) / bandwidth;
                    let w = (-0.5 * z * z).exp();
                    num += w * y;
                    den += w;
                }
                if den > 0.0 {
                    num / den
                } else {
                    f64::NAN
                }
            }
            SmootherKind::Spline { .. } => self.eval_spline(x),
        }
    }

    fn eval_spline(&self, x: f64) -> f64 {
        let (k, g, c) = (&self.knots, &self.values, &self.curvature);
        let n = k.len();
        if x <= k[0] {
            let h = k[1] - k[0];
            let slope = (g[1] - g[0]) / h - h * c[1] / 6.0;
            return g[0] + slope * (x - k[0]);
        }
        if x >= k[n - 1] {
            let h = k[n - 1] - k[n - 2];
            let slope = (g[n - 1] - g[n - 2]) / h + h * c[n - 2] / 6.0;
            return g[n - 1] + slope * (x - k[n - 1]);
        }
        let i = k.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
        let h = k[i + 1] - k[i];
        let (a, b) = (x - k[i], k[i + 1] - x);
        (a * g[i + 1] + b * g[i]) / h
            - a * b / 6.0 * ((1.0 + a / h) * c[i + 1] + (1.0 + b / h) * c[i])
    }

    /// argmax of the fit over `points` equally spaced values on [lo, hi].
    pub fn argmax(&self, lo: f64, hi: f64, points: usize) -> f64 {
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..points {
            let p = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let v = self.eval(p);
            if v > best.1 {
                best = (p, v);
            }
        }
        best.0
    }
}

/// Sorts, merges tied abscissae into weighted means.
fn collapse(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let (mut xs, mut ys, mut ws): (Vec<f64>, Vec<f64>, Vec<f64>) = (vec![], vec![], vec![]);
    for i in idx {
        match xs.last() {
            Some(&last) if (x[i] - last).abs() <= 1e-12 * last.abs().max(1.0) => {
                let k = ys.len() - 1;
                ys[k] = (ys[k] * ws[k] + y[i]) / (ws[k] + 1.0);
                ws[k] += 1.0;
            }
            _ => {
                xs.push(x[i]);
                ys.push(y[i]);
                ws.push(1.0);
            }
        }
    }
    (xs, ys, ws)
}

/// Banded pieces of the penalized normal equations. Interior index j
/// (0..m, m = n − 2) corresponds to knot j + 1.
struct Penalty {
    /// Diagonals of R: main and first super.
    r0: Vec<f64>,
    r1: Vec<f64>,
    /// Diagonals of B = Qᵀ W⁻¹ Q: main, first and second super.
    b0: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
    /// Qᵀ y.
    qty: Vec<f64>,
    /// Columns of Q: entries at rows j, j+1, j+2.
    q: Vec<[f64; 3]>,
}

fn penalty(x: &[f64], y: &[f64], w: &[f64]) -> Penalty {
    let n = x.len();
    let m = n - 2;
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let q: Vec<[f64; 3]> = (0..m)
        .map(|j| [1.0 / h[j], -1.0 / h[j] - 1.0 / h[j + 1], 1.0 / h[j + 1]])
        .collect();
    let mut r0 = vec![0.0; m];
    let mut r1 = vec![0.0; m];
    let mut b0 = vec![0.0; m];
    let mut b1 = vec![0.0; m];
    let mut b2 = vec![0.0; m];
    let mut qty = vec![0.0; m];
    for j in 0..m {
        r0[j] = (h[j] + h[j + 1]) / 3.0;
        if j + 1 < m {
            r1[j] = h[j + 1] / 6.0;
        }
        qty[j] = q[j][0] * y[j] + q[j][1] * y[j + 1] + q[j][2] * y[j + 2];
        // Column j touches rows j..j+2; column j+1 rows j+1..j+3.
        b0[j] = (0..3).map(|k| q[j][k] * q[j][k] / w[j + k]).sum();
        if j + 1 < m {
            b1[j] = q[j][1] * q[j + 1][0] / w[j + 1] + q[j][2] * q[j + 1][1] / w[j + 2];
        }
        if j + 2 < m {
            b2[j] = q[j][2] * q[j + 2][0] / w[j + 2];
        }
    }
    Penalty {
        r0,
        r1,
        b0,
        b1,
        b2,
        qty,
        q,
    }
}

struct Fit {
    values: Vec<f64>,
    gamma: Vec<f64>,
    gcv: f64,
}

/// Solves (R + λB) γ = Qᵀy by banded LDLᵀ and evaluates GCV, with the trace
/// of the hat matrix from the central band of (R + λB)⁻¹.
fn solve(pen: &Penalty, y: &[f64], w: &[f64], lambda: f64) -> Option<Fit> {
    let m = pen.r0.len();
    let n = y.len();
    let a0: Vec<f64> = (0..m).map(|j| pen.r0[j] + lambda * pen.b0[j]).collect();
    let a1: Vec<f64> = (0..m).map(|j| pen.r1[j] + lambda * pen.b1[j]).collect();
    let a2: Vec<f64> = (0..m).map(|j| lambda * pen.b2[j]).collect();
    // M = L D Lᵀ, L unit lower with sub-diagonals l1, l2.
    let mut dg = vec![0.0; m];
    let mut l1 = vec![0.0; m];
    let mut l2 = vec![0.0; m];
    for i in 0..m {
        let mut di = a0[i];
        if i >= 1 {
            di -= l1[i - 1] * l1[i - 1] * dg[i - 1];
        }
        if i >= 2 {
            di -= l2[i - 2] * l2[i - 2] * dg[i - 2];
        }
        if !(di > 0.0) {
            return None;
        }
        dg[i] = di;
        if i + 1 < m {
            let mut v = a1[i];
            if i >= 1 {
                v -= l1[i - 1] * l2[i - 1] * dg[i - 1];
            }
            l1[i] = v / di;
        }
        if i + 2 < m {
            l2[i] = a2[i] / di;
        }
    }
    let mut z = pen.qty.clone();
    for i in 0..m {
        if i >= 1 {
            z[i] -= l1[i - 1] * z[i - 1];
        }
        if i >= 2 {
            z[i] -= l2[i - 2] * z[i - 2];
        }
    }
    for i in 0..m {
        z[i] /= dg[i];
    }
    for i in (0..m).rev() {
        if i + 1 < m {
            z[i] -= l1[i] * z[i + 1];
        }
        if i + 2 < m {
            z[i] -= l2[i] * z[i + 2];
        }
    }
    let gamma = z;
    let mut values = y.to_vec();
    for (j, col) in pen.q.iter().enumerate() {
        for k in 0..3 {
            values[j + k] -= lambda * col[k] * gamma[j] / w[j + k];
        }
    }
    // Central band of Σ = M⁻¹.
    let mut s0 = vec![0.0; m];
    let mut s1 = vec![0.0; m];
    let mut s2 = vec![0.0; m];
    for i in (0..m).rev() {
        let (c1, c2) = (
            if i + 1 < m { l1[i] } else { 0.0 },
            if i + 2 < m { l2[i] } else { 0.0 },
        );
        let at = |v: &Vec<f64>, k: usize| if k < m { v[k] } else { 0.0 };
        s2[i] = -c1 * at(&s1, i + 1) - c2 * at(&s0, i + 2);
        s1[i] = -c1 * at(&s0, i + 1) - c2 * at(&s1, i + 1);
        s0[i] = 1.0 / dg[i] - c1 * s1[i] - c2 * s2[i];
    }
    let mut tr = 0.0;
    for j in 0..m {
        tr += s0[j] * pen.b0[j];
        if j + 1 < m {
            tr += 2.0 * s1[j] * pen.b1[j];
        }
        if j + 2 < m {
            tr += 2.0 * s2[j] * pen.b2[j];
        }
    }
    let dof_resid = lambda * tr;
    let rss: f64 = (0..n).map(|i| w[i] * (y[i] - values[i]).powi(2)).sum();
    let nf = n as f64;
    let gcv = nf * rss / (dof_resid * dof_resid);
    if !gcv.is_finite() || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut curvature = vec![0.0; n];
    curvature[1..n - 1].copy_from_slice(&gamma);
    Some(Fit {
        values,
        gamma: curvature,
        gcv,
    })
}

fn kernel(x: &[f64], y: &[f64]) -> Smoother {
    Smoother {
        kind: SmootherKind::Kernel {
            bandwidth: KERNEL_BANDWIDTH,
        },
        knots: x.to_vec(),
        values: y.to_vec(),
        curvature: vec![],
    }
}

/// Smoothing spline of y on x with λ minimizing GCV over a log grid and a
/// golden-section refinement; falls back to kernel regression when fewer
/// than four distinct abscissae exist or no finite fit is found.
pub fn fit_smoother(x: &[f64], y: &[f64]) -> Smoother {
    let (xs, ys, ws) = collapse(x, y);
    if xs.len() < 4 {
        return kernel(x, y);
    }
    let pen = penalty(&xs, &ys, &ws);
    let span = xs[xs.len() - 1] - xs[0];
    let scale = span.powi(3) / xs.len() as f64;
    let score = |log_l: f64| {
        solve(&pen, &ys, &ws, scale * 10f64.powf(log_l)).map_or(f64::INFINITY, |f| f.gcv)
    };
    let grid: Vec<f64> = (0..=64).map(|k| -10.0 + 16.0 * k as f64 / 64.0).collect();
    let scores: Vec<f64> = grid.iter().map(|&g| score(g)).collect();
    let (best_k, best) =
        scores.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc },
        );
    if !best.is_finite() {
        return kernel(x, y);
    }
    let (mut a, mut b) = (
        grid[best_k.saturating_sub(1)],
        grid[(best_k + 1).min(grid.len() - 1)],
    );
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = score(d);
        }
    }
    let log_l = if fc.min(fd) < best {
        if fc < fd {
            c
        } else {
            d
        }
    } else {
        grid[best_k]
    };
    let lambda = scale * 10f64.powf(log_l);
    match solve(&pen, &ys, &ws, lambda) {
        Some(fit) => Smoother {
            kind: SmootherKind::Spline {
                lambda,
                gcv: fit.gcv,
            },
            knots: xs,
            values: fit.values,
            curvature: fit.gamma,
        },
        None => kernel(x, y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense reference: hat-matrix trace by explicit inversion.
    fn dense_trace(x: &[f64], lambda: f64) -> f64 {
        let n = x.len();
        let m = n - 2;
        let w = vec![1.0; n];
        let pen = penalty(x, &vec![0.0; n], &w);
        let mut mat = vec![vec![0.0; m]; m];
        let mut bm = vec![vec![0.0; m]; m];
        for j in 0..m {
            mat[j][j] = pen.r0[j] + lambda * pen.b0[j];
            bm[j][j] = pen.b0[j];
            if j + 1 < m {
                mat[j][j + 1] = pen.r1[j] + lambda * pen.b1[j];
                mat[j + 1][j] = mat[j][j + 1];
                bm[j][j + 1] = pen.b1[j];
                bm[j + 1][j] = pen.b1[j];
            }
            if j + 2 < m {
                mat[j][j + 2] = lambda * pen.b2[j];
                mat[j + 2][j] = mat[j][j + 2];
                bm[j][j + 2] = pen.b2[j];
                bm[j + 2][j] = pen.b2[j];
            }
        }
        // Gauss-Jordan inverse.
        let mut inv = vec![vec![0.0; m]; m];
        for (i, row) in inv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for col in 0..m {
            let piv = mat[col][col];
            for k in 0..m {
                mat[col][k] /= piv;
                inv[col][k] /= piv;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r][col];
                    for k in 0..m {
                        mat[r][k] -= f * mat[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
        let mut tr = 0.0;
        for i in 0..m {
            for j in 0..m {
                tr += inv[i][j] * bm[j][i];
            }
        }
        n as f64 - lambda * tr
    }

    #[test]
    fn banded_trace_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x: Vec<f64> = (0..25).map(|_| rng.random_range(10.0..30.0)).collect();
        x.sort_by(f64::total_cmp);
        let w = vec![1.0; x.len()];
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let pen = penalty(&x, &y, &w);
        for lambda in [1e-3, 0.1, 10.0] {
            let fit = solve(&pen, &y, &w, lambda).unwrap();
            let rss: f64 = y
                .iter()
                .zip(&fit.values)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            let tr_a = dense_trace(&x, lambda);
            let gcv = x.len() as f64 * rss / (x.len() as f64 - tr_a).powi(2);
            assert!((fit.gcv - gcv).abs() < 1e-8 * gcv, "{} {gcv}", fit.gcv);
        }
    }

    #[test]
    fn huge_penalty_gives_least_squares_line() {
        let x: Vec<f64> = (0..30).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0 + (v * 1.7).sin()).collect();
        let (xs, ys, ws) = collapse(&x, &y);
        let pen = penalty(&xs, &ys, &ws);
        let fit = solve(&pen, &ys, &ws, 1e12).unwrap();
        let n = 30.0;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        for (i, v) in fit.values.iter().enumerate() {
            assert!((v - (my + slope * (x[i] - mx))).abs() < 1e-4);
        }
    }

    #[test]
    fn noiseless_parabola_peak_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..60).map(|_| rng.random_range(10.0..30.0)).collect();
        let y: Vec<f64> = x.iter().map(|p| -(p - 20.0) * (p - 20.0)).collect();
        let s = fit_smoother(&x, &y);
        assert!(matches!(s.kind, SmootherKind::Spline { .. }));
        let p_hat = s.argmax(10.0, 30.0, 1000);
        assert!((p_hat - 20.0).abs() <= 0.2, "{p_hat}");
    }

    #[test]
    fn noisy_data_recovers_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(10.0..30.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|p| (p / 5.0).sin() + 0.1 * (rng.random::<f64>() - 0.5))
            .collect();
        let s = fit_smoother(&x, &y);
        for k in 0..20 {
            let p = 11.0 + k as f64;
            assert!((s.eval(p) - (p / 5.0).sin()).abs() < 0.03, "{p}");
        }
    }

    #[test]
    fn interpolates_linearly_between_knots_at_zero_curvature() {
        let s = Smoother {
            kind: SmootherKind::Spline {
                lambda: 0.0,
                gcv: 0.0,
            },
            knots: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 4.0],
            curvature: vec![0.0; 3],
        };
        assert_eq!(s.eval(1.5), 2.5);
        assert_eq!(s.eval(3.0), 7.0);
    }

    #[test]
    fn too_few_points_falls_back_to_kernel() {
        let s = fit_smoother(&[1.0, 2.0, 2.0], &[0.0, 1.0, 3.0]);
        assert!(matches!(s.kind, SmootherKind::Kernel { .. }));
        assert!(s.eval(1.5).is_finite());
    }
}
