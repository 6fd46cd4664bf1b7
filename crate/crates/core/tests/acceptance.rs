//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{blocked_grid, grid_best, intensity_oracle, ks_distance, rel_err};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use relaycache_core::analytic::noise_limited::{snr_scale, y_term};
use relaycache_core::analytic::*;
use relaycache_core::experiment::*;
use relaycache_core::optim::*;
use relaycache_core::sim::run_trials;
use relaycache_core::*;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome { pass, summary: summary.into(), details: Vec::new() }
    }
}

fn reference() -> (ExperimentSpec, NetworkConfig, ContentCatalog) {
    let spec = ExperimentSpec::default();
    let cfg = spec.network().unwrap();
    let catalog = spec.catalog().unwrap();
    (spec, cfg, catalog)
}

fn policy(kind: PolicyKind, mode: EvaluationMode, spec: &ExperimentSpec, cfg: &NetworkConfig, catalog: &ContentCatalog) -> Result<CachingPolicy> {
    Ok(compute_policy(kind, mode, spec, cfg, catalog)?.policy)
}

fn analytic_vs_monte_carlo() -> Result<Outcome> {
    let (spec, cfg, catalog) = reference();
    let ev = SbopEvaluator::new(&cfg, spec.quadrature_order)?;
    let mut pass = true;
    let mut details = Vec::new();
    for side in [800.0, 1600.0] {
        let cfg = NetworkConfig { area_side: side, ..cfg.clone() };
        for kind in [PolicyKind::Mpc, PolicyKind::Uc, PolicyKind::CpCo] {
            let start = Instant::now();
            let p = policy(kind, EvaluationMode::Analytic, &spec, &cfg, &catalog)?;
            let analytic = ev.total(&p, &catalog)?.total;
            let mc = run_trials(&cfg, &catalog, &p, 2000, spec.seed)?;
            let tol = 0.03f64.max(3.0 * mc.std_error);
            let diff = (analytic - mc.sbop).abs();
            let ok = diff <= tol;
            if side == 800.0 {
                pass &= ok;
            }
            details.push(format!(
                "{}{kind} at {side} m: analytic {analytic:.4}, MC {:.4} ± {:.4}, |diff| {diff:.4} (tol {tol:.4}, {}) in {:.1} s",
                if side == 800.0 { "" } else { "info: " },
                mc.sbop,
                mc.std_error,
                if ok { "ok" } else { "exceeds" },
                start.elapsed().as_secs_f64()
            ));
        }
    }
    Ok(Outcome { pass, summary: "analytic SBOP matches Monte Carlo (800 m, 2000 deployments)".into(), details })
}

fn noise_limited_ordering() -> Result<Outcome> {
    let (spec, _, _) = reference();
    let mut pass = true;
    let mut details = Vec::new();
    for lambda_rn in [0.0, 1e-5, 3e-5, 5e-5] {
        let point = spec.with_value(SweepVariable::LambdaRn, lambda_rn);
        let cfg = point.network()?;
        let catalog = point.catalog()?;
        let mode = EvaluationMode::NoiseLimited;
        let value = |kind| -> Result<f64> {
            let p = policy(kind, mode, &point, &cfg, &catalog)?;
            sbop_noise_limited(&p, &catalog, &cfg)
        };
        let poa = value(PolicyKind::CpPoa)?;
        let co = value(PolicyKind::CpCo)?;
        let mpc = value(PolicyKind::Mpc)?;
        let uc = value(PolicyKind::Uc)?;
        let ok = poa >= co - point.poa_epsilon && co >= mpc.max(uc) - 1e-6;
        pass &= ok;
        details.push(format!(
            "lambda_rn {lambda_rn:e}: POA {poa:.6}, CO {co:.6}, MPC {mpc:.6}, UC {uc:.6}{}",
            if ok { "" } else { " (violated)" }
        ));
    }
    Ok(Outcome { pass, summary: "noise-limited ordering CP-POA ≥ CP-CO − ε ≥ baselines".into(), details })
}

fn poa_matches_grid() -> Result<Outcome> {
    let (spec, cfg, _) = reference();
    let mut pass = true;
    let mut details = Vec::new();
    for (f, cap) in [(2usize, 1.0), (3, 1.5), (4, 2.0), (4, 1.0)] {
        let catalog = ContentCatalog::new(f, spec.delta, cap, spec.tau_min_bps, spec.tau_max_bps, spec.bandwidth_hz)?;
        let c = compute_kkt_coefficients(&catalog, &cfg)?;
        let a = catalog.popularity.clone();
        let opts = PoaOptions { epsilon: spec.poa_epsilon, ..PoaOptions::default() };
        let start = Instant::now();
        let r = cp_poa(|p| c.objective(&a, p), f, cap, opts)?;
        let secs = start.elapsed().as_secs_f64();
        let grid = grid_best(&c, &a, cap);
        let ok = (r.value - grid).abs() <= 2.0 * opts.epsilon && secs <= 60.0;
        pass &= ok;
        details.push(format!(
            "F {f}, C {cap}: POA {:.6} vs grid {grid:.6} in {secs:.2} s ({} iterations)",
            r.value, r.iterations
        ));
    }
    Ok(Outcome { pass, summary: "CP-POA within 2ε of grid search for F ≤ 4, under 1 min".into(), details })
}

fn co_kkt_certificate() -> Result<Outcome> {
    let (spec, _, _) = reference();
    let mut pass = true;
    let mut details = Vec::new();
    for lambda_rn in [0.0, 1e-5, 3e-5, 5e-5] {
        let point = spec.with_value(SweepVariable::LambdaRn, lambda_rn);
        let cfg = point.network()?;
        let catalog = point.catalog()?;
        let c = compute_kkt_coefficients(&catalog, &cfg)?;
        let r = cp_co(&catalog, &cfg, 1e-6)?;
        let eps = r.multiplier;
        let total: f64 = r.probs.iter().sum();
        let mut worst: f64 = 0.0;
        for (n, &p) in r.probs.iter().enumerate() {
            let slope = c.k[n] * catalog.popularity[n] * c.t[n] * (-p * c.t[n]).exp();
            let violation = if p > 0.0 && p < 1.0 {
                (slope - eps).abs() / eps
            } else if p == 0.0 {
                (slope - eps).max(0.0) / eps
            } else {
                (eps - slope).max(0.0) / eps
            };
            worst = worst.max(violation);
        }
        let ok = eps > 0.0 && (total - catalog.cache_size).abs() <= 1e-6 && r.iterations <= 200 && worst <= 1e-5;
        pass &= ok;
        details.push(format!(
            "lambda_rn {lambda_rn:e}: multiplier {eps:.6e}, budget {total:.9}, {} iterations, stationarity {worst:.2e}",
            r.iterations
        ));
    }
    Ok(Outcome { pass, summary: "CP-CO satisfies the KKT conditions".into(), details })
}

fn random_feasible(rng: &mut ChaCha8Rng, f: usize, cap: f64, step: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..f).map(|_| rng.random_range(0.0..1.0 - step)).collect();
    let budget = cap - step;
    let total: f64 = p.iter().sum();
    if total > budget {
        let scale = budget / total;
        p.iter_mut().for_each(|x| *x *= scale);
    }
    p
}

fn sbop_monotone_in_caching() -> Result<Outcome> {
    let (spec, cfg, catalog) = reference();
    let ev = SbopEvaluator::new(&cfg, spec.quadrature_order)?;
    let step = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let policies: Vec<Vec<f64>> = (0..50)
        .map(|_| random_feasible(&mut rng, catalog.f_count, catalog.cache_size, step))
        .collect();
    let total = |p: Vec<f64>| -> Result<f64> { Ok(ev.total(&CachingPolicy::new(p, catalog.cache_size)?, &catalog)?.total) };
    let worst = policies
        .into_par_iter()
        .map(|p| {
            let base = total(p.clone())?;
            let mut worst = f64::INFINITY;
            for n in 0..p.len() {
                let mut q = p.clone();
                q[n] += step;
                worst = worst.min(total(q)? - base);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut out = Outcome::new(worst >= -1e-6, "SBOP nondecreasing in each caching probability");
    out.details.push(format!("50 random policies, smallest forward difference {worst:.3e}"));
    Ok(out)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn inverse_power_cdf_oracle() -> Result<Outcome> {
    let (_, cfg, _) = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let density = log_uniform(&mut rng, 1e-6, 1e-3);
        let p_bar = log_uniform(&mut rng, 1e-6, 1e2);
        let tier = TierSpec::new(density, p_bar, &cfg);
        let x = tier.inverse_intensity(log_uniform(&mut rng, 1e-3, 20.0))?;
        let expected = -(-intensity_oracle(&tier, x)).exp_m1();
        worst = worst.max(rel_err(inverse_power_cdf(&tier, x), expected));
    }
    let mut out = Outcome::new(worst <= 1e-6, "inverse-power CDF matches direct integration");
    out.details.push(format!("100 random tiers, worst relative error {worst:.2e}"));
    Ok(out)
}

fn blockage_term_oracle() -> Result<Outcome> {
    let (_, cfg, catalog) = reference();
    let f = catalog.f_count;
    let mut pass = true;
    let mut details = Vec::new();
    for n in [1, f / 2, f] {
        let nu = catalog.sinr_thresholds[n - 1];
        let xi = snr_scale(cfg.p_bs, nu, &cfg);
        let value = y_term(cfg.lambda_bs, xi, &cfg)?;
        let grid = blocked_grid(cfg.lambda_bs, xi, true, &cfg) - blocked_grid(cfg.lambda_bs, xi, false, &cfg);
        let err = rel_err(value, grid);
        pass &= err <= 1e-4;
        details.push(format!("file {n}: {value:.8e} vs grid {grid:.8e}, relative error {err:.2e}"));
    }
    Ok(Outcome { pass, summary: "blockage term matches a dense 2D grid".into(), details })
}

fn heavy_blockage_limit() -> Result<Outcome> {
    let (_, base, _) = reference();
    let cfg = NetworkConfig { beta: 100.0 * base.beta, ..base };
    let mut pass = true;
    let mut details = Vec::new();
    for p in [0.2, 0.5, 1.0] {
        let (bsn, rn) = (TierSpec::bs(&cfg, p), TierSpec::rn(&cfg));
        let los = (bsn.los_only(), rn.los_only());
        let ks = ks_distance(|x| los.0.pdf(x) * one_hop_weight(&los.0, &los.1, x), |x| los.0.pdf(x), 1e-12, 1e12, 20_000);
        let lo = bsn.inverse_intensity(1e-12)?.min(rn.inverse_intensity(1e-12)?);
        let hi = bsn.inverse_intensity(60.0)?.max(rn.inverse_intensity(60.0)?);
        let full = ks_distance(|x| bsn.pdf(x) * one_hop_weight(&bsn, &rn, x), |x| bsn.pdf(x), lo, hi, 20_000);
        pass &= ks < 0.02;
        details.push(format!("p {p}: KS {ks:.2e} (LOS-only tiers); info: KS {full:.3} with NLOS nodes"));
    }
    Ok(Outcome { pass, summary: "one-hop density approaches the caching-tier density under heavy blockage".into(), details })
}

fn quadrature_convergence() -> Result<Outcome> {
    let (spec, cfg, catalog) = reference();
    let low = SbopEvaluator::new(&cfg, 20)?;
    let high = SbopEvaluator::new(&cfg, 40)?;
    let mut pass = true;
    let mut details = Vec::new();
    for kind in [PolicyKind::Mpc, PolicyKind::Uc, PolicyKind::CpCo] {
        let p = policy(kind, EvaluationMode::Analytic, &spec, &cfg, &catalog)?;
        let (a, b) = (low.total(&p, &catalog)?.total, high.total(&p, &catalog)?.total);
        pass &= (a - b).abs() < 1e-3;
        details.push(format!("{kind}: q=20 {a:.8}, q=40 {b:.8}, |diff| {:.2e}", (a - b).abs()));
    }
    Ok(Outcome { pass, summary: "SBOP stable between quadrature orders 20 and 40".into(), details })
}

fn sweep(var: SweepVariable, values: &[f64], policies: &[PolicyKind]) -> Result<Vec<ResultRow>> {
    let spec = ExperimentSpec {
        sweep_variable: Some(var),
        sweep_values: values.to_vec(),
        policies: policies.to_vec(),
        modes: vec![EvaluationMode::Analytic],
        output: None,
        ..ExperimentSpec::default()
    };
    Ok(run_experiment(&spec, None)?.rows)
}

fn parameter_trends() -> Result<Outcome> {
    let policies = [PolicyKind::Mpc, PolicyKind::Uc, PolicyKind::CpCo];
    let checks: [(SweepVariable, &[f64], bool); 5] = [
        (SweepVariable::LambdaRn, &[0.0, 1e-5, 2e-5, 3e-5, 4e-5, 5e-5], true),
        (SweepVariable::LambdaBs, &[5e-6, 1e-5, 2e-5, 4e-5], true),
        (SweepVariable::CacheSize, &[2.0, 4.0, 6.0, 8.0, 10.0], true),
        (SweepVariable::SinrThresholdDb, &[-5.0, 0.0, 5.0, 10.0, 15.0, 20.0], false),
        (SweepVariable::Beta, &[1e-4, 2e-4, 4e-4, 1e-3, 2e-3, 4e-3], false),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (var, values, increasing) in checks {
        let rows = sweep(var, values, &policies)?;
        for kind in policies {
            let series: Vec<f64> = values
                .iter()
                .map(|&v| rows.iter().find(|r| r.policy == kind && r.sweep_value == Some(v)).unwrap().sbop)
                .collect();
            let ok = series.windows(2).all(|w| if increasing { w[1] >= w[0] - 1e-9 } else { w[1] <= w[0] + 1e-9 });
            pass &= ok;
            let shown: Vec<String> = series.iter().map(|s| format!("{s:.4}")).collect();
            details.push(format!(
                "{kind} {} in {var}: [{}] {}",
                if increasing { "nondecreasing" } else { "nonincreasing" },
                shown.join(", "),
                if ok { "ok" } else { "violated" }
            ));
        }
    }
    let (spec, _, _) = reference();
    let mut peaks = Vec::new();
    for lambda_rn in [0.0, 1e-5, 3e-5, 5e-5] {
        let point = spec.with_value(SweepVariable::LambdaRn, lambda_rn);
        let p = policy(PolicyKind::CpPoa, EvaluationMode::Analytic, &point, &point.network()?, &point.catalog()?)?;
        peaks.push(p.probs.iter().copied().fold(0.0, f64::max));
    }
    let ok = peaks.windows(2).all(|w| w[1] <= w[0] + 1e-9) && peaks[peaks.len() - 1] < peaks[0];
    pass &= ok;
    let shown: Vec<String> = peaks.iter().map(|s| format!("{s:.4}")).collect();
    details.push(format!("cp_poa max p_n decreasing in lambda_rn: [{}] {}", shown.join(", "), if ok { "ok" } else { "violated" }));
    Ok(Outcome { pass, summary: "SBOP and placement follow the parameter trends".into(), details })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("analytic_vs_monte_carlo", analytic_vs_monte_carlo),
        ("noise_limited_ordering", noise_limited_ordering),
        ("poa_matches_grid", poa_matches_grid),
        ("co_kkt_certificate", co_kkt_certificate),
        ("sbop_monotone_in_caching", sbop_monotone_in_caching),
        ("inverse_power_cdf_oracle", inverse_power_cdf_oracle),
        ("blockage_term_oracle", blockage_term_oracle),
        ("heavy_blockage_limit", heavy_blockage_limit),
        ("quadrature_convergence", quadrature_convergence),
        ("parameter_trends", parameter_trends),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        println!(
            "{} criterion {:>2} {name}: {} [{:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.summary,
            start.elapsed().as_secs_f64()
        );
        for line in &outcome.details {
            println!("       {line}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
