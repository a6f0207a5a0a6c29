//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its measured values and runtime; the process fails if any check fails.
//! Pass a substring to run only the matching checks, e.g.
//! `cargo test --test acceptance -- surge`.

use std::time::{Duration, Instant};

use eqexp::equilibrium::{
    activation_map, concavity_diagnostic, finite_n_q, mean_field_report, perturbed_utility,
    solve_fixed_point, solve_mu, stein_dq, utility, MU_FLOOR,
};
use eqexp::harness::{
    benchmarks, cached_oracle, run_experiment, run_local, weighted_regret_path, ExperimentConfig,
    Method,
};
use eqexp::inference::estimate_utility_gradient;
use eqexp::market::{AllocationCurve, MarketConfig, PaymentInterval};
use eqexp::policy::{mirror_descent_step, oracle_optimal_payment, GradientSource, OptimizerState};
use eqexp::simulator::{run_day, simulate_queue_allocation, SeedSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fig2() -> MarketConfig {
    ExperimentConfig::preset("fig2").unwrap().model
}

fn sec6() -> MarketConfig {
    ExperimentConfig::preset("sec6").unwrap().model
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Five-point central difference.
fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// Root-mean-square error of Γ̂ against u'(20) at d = 0.4 over the valid
/// estimates, with the number of valid replications.
fn gradient_rmse(n: u64, reps: u64) -> (f64, usize) {
    let mut model = fig2();
    model.n = n;
    let (p, zeta) = (20.0, 0.5);
    let target = mean_field_report(p, 0.4, &model).unwrap().u_prime;
    let seeds = SeedSpec::new(11);
    let errs: Vec<f64> = (0..reps)
        .filter_map(|rep| {
            let day = run_day(&model, p, zeta, &seeds.day(rep, 1)).unwrap();
            let g = estimate_utility_gradient(&day, p, &model);
            g.valid.then(|| (g.gamma_hat - target).powi(2))
        })
        .collect();
    let rmse = (errs.iter().sum::<f64>() / errs.len() as f64).sqrt();
    (rmse, errs.len())
}

fn gradient_consistency() -> Outcome {
    let (small, valid_small) = gradient_rmse(1_000, 200);
    let (large, valid_large) = gradient_rmse(100_000, 200);
    let ratio = small / large;
    outcome(
        ratio >= 3.0,
        format!(
            "RMSE n=1e3 {small:.4} ({valid_small}/200 valid), n=1e5 {large:.4} ({valid_large}/200 valid), ratio {ratio:.2} >= 3"
        ),
    )
}

fn derivative_identities() -> Outcome {
    let model = fig2();
    let d = 0.4;
    let h = 1e-3;
    let mut worst_mu: f64 = 0.0;
    let mut worst_u: f64 = 0.0;
    for k in 0..50 {
        let p = 10.0 + 20.0 * k as f64 / 49.0;
        let r = mean_field_report(p, d, &model).unwrap();
        let mu_fd = derivative(|x| solve_mu(x, 0.0, d, &model).unwrap().mu, p, h);
        let u_fd = derivative(|x| utility(x, d, &model).unwrap(), p, h);
        worst_mu = worst_mu.max(rel_err(r.mu_prime, mu_fd));
        worst_u = worst_u.max(rel_err(r.u_prime, u_fd));
    }
    outcome(
        worst_mu <= 1e-4 && worst_u <= 1e-4,
        format!("max relative error mu' {worst_mu:.2e}, u' {worst_u:.2e} (<= 1e-4)"),
    )
}

fn stein_identity() -> Outcome {
    let check = |mu: f64, demand: f64, n: u64, capacity: u32| {
        let model = MarketConfig {
            allocation: AllocationCurve::FiniteCapacityQueue { capacity },
            ..MarketConfig::default()
        };
        let fd = derivative(|m| finite_n_q(m, demand, n, &model).unwrap(), mu, 1e-5);
        (stein_dq(mu, demand, n, &model).unwrap() - fd).abs()
    };
    let anchor = check(0.5, 16.0, 40, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let worst = (0..20)
        .map(|_| {
            let n = rng.random_range(2..=50u64);
            let mu = rng.random_range(0.05..0.95);
            let demand = rng.random_range(0.0..2.0 * n as f64);
            let capacity = rng.random_range(2..=12u32);
            check(mu, demand, n, capacity)
        })
        .fold(anchor, f64::max);
    outcome(
        anchor <= 1e-7 && worst <= 1e-7,
        format!(
            "|stein - finite difference| anchor {anchor:.2e}, worst of 21 {worst:.2e} (<= 1e-7)"
        ),
    )
}

fn queue_limit() -> Outcome {
    let curve = AllocationCurve::FiniteCapacityQueue { capacity: 8 };
    let servers = 100;
    let errs: Vec<(f64, f64)> = [0.5, 0.8, 1.0, 2.0]
        .iter()
        .enumerate()
        .map(|(k, &ratio)| {
            let sim = simulate_queue_allocation(
                ratio * servers as f64,
                servers,
                8,
                1_000_000,
                100 + k as u64,
            );
            (ratio, sim / curve.value(ratio) - 1.0)
        })
        .collect();
    let pass = errs.iter().all(|(_, e)| e.abs() <= 0.01);
    let detail = errs
        .iter()
        .map(|(r, e)| format!("{r}: {:+.3}%", 100.0 * e))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("relative error by D/T {detail} (within 1%)"))
}

fn local_versus_global() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset("sec6").unwrap();
    cfg.out_dir = dir.path().to_path_buf();
    let s = run_experiment(&cfg, &[Method::Local, Method::Global]).unwrap();
    let local = s.local.as_ref().unwrap();
    let (l_in, l_fut) = (local.in_sample_regret.mean, local.future_regret.mean);
    let best_in = s
        .global
        .iter()
        .map(|g| g.in_sample_regret.mean)
        .fold(f64::INFINITY, f64::min);
    let best_fut = s
        .global
        .iter()
        .map(|g| g.future_regret.mean)
        .fold(f64::INFINITY, f64::min);
    let arg = s
        .global
        .iter()
        .position(|g| g.in_sample_regret.mean == best_in)
        .unwrap();
    let interior = arg > 0 && arg + 1 < s.global.len();
    let curve = s
        .global
        .iter()
        .map(|g| format!("{}:{:.3}", g.explore_t.unwrap(), g.in_sample_regret.mean))
        .collect::<Vec<_>>()
        .join(" ");
    let pass = l_in <= 0.1
        && l_fut <= 0.02
        && best_in >= 5.0 * l_in
        && best_fut >= 5.0 * l_fut
        && interior;
    outcome(
        pass,
        format!(
            "local in-sample {l_in:.4} (<= 0.1), future {l_fut:.5} (<= 0.02); global best in-sample {best_in:.3} ({:.1}x), future {best_fut:.4} ({:.1}x), both >= 5x; in-sample by exploreT [{curve}], minimum interior: {interior}",
            best_in / l_in,
            best_fut / l_fut
        ),
    )
}

fn surge_shift() -> Outcome {
    let base = oracle_optimal_payment(&sec6()).unwrap();
    let surge =
        oracle_optimal_payment(&ExperimentConfig::preset("sec6-surge").unwrap().model).unwrap();
    let gain = surge.u_star - base.u_star;
    let pass = (base.p_star - 17.6).abs() <= 0.5
        && (surge.p_star - 15.7).abs() <= 0.5
        && (gain - 0.06).abs() <= 0.03;
    outcome(
        pass,
        format!(
            "p* {:.3} (17.6 +- 0.5), surge p* {:.3} (15.7 +- 0.5), utility gain {gain:.4} (0.06 +- 0.03)",
            base.p_star, surge.p_star
        ),
    )
}

fn randomization_cost() -> Outcome {
    let model = sec6();
    let nodes = model.context.expectation_nodes(64);
    let p = 17.6;
    let expected = |zeta: f64| -> f64 {
        nodes
            .iter()
            .map(|&(d, w)| w * perturbed_utility(p, zeta, d, &model).unwrap())
            .sum()
    };
    let u0 = expected(0.0);
    let pts: Vec<(f64, f64)> = [0.025, 0.05, 0.1, 0.2]
        .iter()
        .map(|&z: &f64| (z.ln(), (u0 - expected(z)).ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    outcome(
        (slope - 2.0).abs() <= 0.1,
        format!("log-log slope {slope:.4} (2.0 +- 0.1)"),
    )
}

fn regret_bound() -> Outcome {
    let mut cfg = ExperimentConfig::preset("sec6").unwrap();
    cfg.replications = 50;
    cfg.gradient_source = GradientSource::MeanField;
    cfg.model.interval = PaymentInterval::new(5.0, 60.0);
    let oracle = cached_oracle(&cfg.model, None).unwrap();
    let benches = benchmarks(&cfg, &oracle);
    let run = run_local(&cfg, &oracle, &benches).unwrap();
    let m_hat = concavity_diagnostic(&cfg.model, 5.0, 60.0, 41, 16)
        .unwrap()
        .gradient_bound;
    let bound = cfg.local.eta * m_hat * m_hat / 2.0;
    let worst = run
        .reps
        .iter()
        .flat_map(|r| {
            let regrets: Vec<f64> = r.trajectory.iter().map(|x| x.regret_t).collect();
            weighted_regret_path(&regrets)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst <= bound,
        format!("max weighted regret {worst:.4} <= eta M^2/2 = {bound:.3} (M = {m_hat:.4})"),
    )
}

fn omd_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let eta = rng.random_range(0.1..50.0);
        let p1 = rng.random_range(1.0..60.0);
        let scale = rng.random_range(0.01..2.0);
        let mut s = OptimizerState::new(p1, eta, PaymentInterval::unbounded()).unwrap();
        let mut p = p1;
        for t in 1..=200 {
            let g = scale * rng.random_range(-1.0..1.0);
            mirror_descent_step(&mut s, Some(g));
            p += 2.0 * eta * g / (t as f64 + 1.0);
            worst = worst.max((s.p_current - p).abs());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max |closed form - recursion| {worst:.2e} (<= 1e-9)"),
    )
}

fn uniqueness_and_concavity() -> Outcome {
    let model = sec6();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_residual: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    for _ in 0..100 {
        let p = rng.random_range(5.0..60.0);
        let d = rng.random_range(0.05..0.95);
        let zeta = rng.random_range(0.0..0.5);
        let r = solve_mu(p, zeta, d, &model).unwrap();
        worst_residual = worst_residual.max(r.residual);
        let psi = |mu: f64| activation_map(&model, p, zeta, d, mu);
        for _ in 0..64 {
            let lo = rng.random_range(MU_FLOOR..r.mu);
            let hi = rng.random_range(r.mu..=1.0);
            let root = solve_fixed_point(psi, lo, hi);
            worst_residual = worst_residual.max(root.residual);
            worst_spread = worst_spread.max((root.mu - r.mu).abs());
        }
    }
    let c = concavity_diagnostic(&model, 10.0, 30.0, 41, 64).unwrap();
    outcome(
        worst_residual < 1e-12 && worst_spread <= 1e-12 && c.pass,
        format!(
            "max residual {worst_residual:.1e} (< 1e-12), max restart spread {worst_spread:.1e}, worst second difference of E u on [10, 30] {:.3e} (< 0)",
            c.worst_second_difference
        ),
    )
}

type Check = (&'static str, fn() -> Outcome, u64);

fn main() {
    let checks: [Check; 10] = [
        ("gradient consistency", gradient_consistency, 120),
        ("derivative identities", derivative_identities, 10),
        ("stein identity", stein_identity, 5),
        ("queue limit", queue_limit, 60),
        ("local versus global", local_versus_global, 1_800),
        ("surge shift", surge_shift, 300),
        ("randomization cost", randomization_cost, 10),
        ("regret bound", regret_bound, 120),
        ("omd equivalence", omd_equivalence, 1),
        ("uniqueness and concavity", uniqueness_and_concavity, 10),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check, budget) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}; {:.1}s (budget {budget}s)",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
