mod common;

use common::grid_best;
use relaycache_core::analytic::{compute_kkt_coefficients, KktCoefficients};
use relaycache_core::experiment::ExperimentSpec;
use relaycache_core::optim::*;
use relaycache_core::*;

fn coeffs(k: &[f64], t: &[f64]) -> KktCoefficients {
    KktCoefficients { k: k.to_vec(), t: t.to_vec() }
}

fn reference_catalog(f_count: usize, cache_size: f64) -> ContentCatalog {
    let spec = ExperimentSpec::default();
    ContentCatalog::new(f_count, spec.delta, cache_size, spec.tau_min_bps, spec.tau_max_bps, spec.bandwidth_hz).unwrap()
}

// root of K a T e^{-pT} = eps by bisection on p ∈ [0, 1]
fn stationary_p(k: f64, a: f64, t: f64, eps: f64) -> f64 {
    let g = |p: f64| k * a * t * (-p * t).exp() - eps;
    if g(0.0) <= 0.0 {
        return 0.0;
    }
    if g(1.0) >= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn multiplier_regimes() {
    let c = coeffs(&[1.0, 0.8, 0.9], &[2.0, 3.0, 0.5]);
    let a = [0.5, 0.3, 0.2];
    let slopes: Vec<f64> = (0..3).map(|i| c.k[i] * a[i] * c.t[i]).collect();
    let max = slopes.iter().cloned().fold(0.0, f64::max);
    assert!(caching_prob_from_multiplier(max, &c, &a).iter().all(|&p| p == 0.0));
    let min = (0..3).map(|i| slopes[i] * (-c.t[i]).exp()).fold(f64::INFINITY, f64::min);
    assert!(caching_prob_from_multiplier(min, &c, &a).iter().all(|&p| p == 1.0));
}

#[test]
fn multiplier_two_file_example() {
    let c = coeffs(&[1.0, 1.0], &[1.0, 1.0]);
    let a = [0.6, 0.4];
    let eps = 0.4 * (-0.5f64).exp();
    let p = caching_prob_from_multiplier(eps, &c, &a);
    assert!((p[0] - (1.5f64.ln() + 0.5)).abs() < 1e-12);
    assert!((p[1] - 0.5).abs() < 1e-12);
    for i in 0..2 {
        assert!((p[i] - stationary_p(1.0, a[i], 1.0, eps)).abs() < 1e-12);
    }
}

#[test]
fn budget_slack_and_symmetry() {
    let c = coeffs(&[1.0, 1.0], &[2.0, 2.0]);
    let r = cp_co_with(&c, &[0.5, 0.5], 2.0, 1e-6).unwrap();
    assert_eq!(r.probs, vec![1.0, 1.0]);
    let r = cp_co_with(&c, &[0.5, 0.5], 1.0, 1e-6).unwrap();
    assert!(r.probs.iter().all(|p| (p - 0.5).abs() < 1e-6));
}

#[test]
fn kkt_certificate_on_reference_catalogue() {
    let cfg = NetworkConfig::reference();
    let spec = ExperimentSpec::default();
    let catalog = spec.catalog().unwrap();
    let c = compute_kkt_coefficients(&catalog, &cfg).unwrap();
    let r = cp_co(&catalog, &cfg, 1e-6).unwrap();
    let eps = r.multiplier;
    assert!(eps > 0.0);
    assert!(r.iterations <= 200);
    let total: f64 = r.probs.iter().sum();
    assert!((total - catalog.cache_size).abs() <= 1e-6, "budget {total}");
    for (n, &p) in r.probs.iter().enumerate() {
        if p > 0.0 && p < 1.0 {
            let slope = c.k[n] * catalog.popularity[n] * c.t[n] * (-p * c.t[n]).exp();
            assert!((slope - eps).abs() <= 1e-5 * eps, "file {n}: {slope} vs {eps}");
        }
    }
}

#[test]
fn equal_rates_cache_popular_files_more() {
    let spec = ExperimentSpec::default();
    let catalog = ContentCatalog::new(10, 0.8, 3.0, 2e8, 2e8, spec.bandwidth_hz).unwrap();
    let r = cp_co(&catalog, &NetworkConfig::reference(), 1e-6).unwrap();
    assert!(r.probs.windows(2).all(|w| w[0] >= w[1]));
}

// capped-simplex projection: clamp(y − τ, 0, 1) with Σ ≤ C
fn project(y: &[f64], cap: f64) -> Vec<f64> {
    let clamp = |tau: f64| y.iter().map(|&v| (v - tau).clamp(0.0, 1.0)).collect::<Vec<_>>();
    if clamp(0.0).iter().sum::<f64>() <= cap {
        return clamp(0.0);
    }
    let (mut lo, mut hi) = (0.0, y.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clamp(mid).iter().sum::<f64>() > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clamp(hi)
}

#[test]
fn co_matches_projected_gradient() {
    let cfg = NetworkConfig::reference();
    let catalog = reference_catalog(20, 10.0);
    let c = compute_kkt_coefficients(&catalog, &cfg).unwrap();
    let a = &catalog.popularity;
    let lipschitz = (0..20).map(|n| c.k[n] * a[n] * c.t[n] * c.t[n]).fold(0.0, f64::max);
    let mut p = vec![0.5; 20];
    for _ in 0..200_000 {
        let g = c.gradient(a, &p);
        let y: Vec<f64> = p.iter().zip(&g).map(|(x, d)| x + d / lipschitz).collect();
        p = project(&y, 10.0);
    }
    let oracle = c.objective(a, &p);
    let r = cp_co(&catalog, &cfg, 1e-6).unwrap();
    assert!((r.value - oracle).abs() < 1e-4, "{} vs {oracle}", r.value);
}

#[test]
fn projection_examples() {
    let simplex = |cap: f64| move |p: &[f64]| p.iter().all(|&v| v >= 0.0) && p.iter().sum::<f64>() <= cap + 1e-12;
    let p = project_to_boundary(&[1.0, 1.0], simplex(1.0)).unwrap();
    assert!(p.iter().all(|v| (v - 0.5).abs() < 1e-9));
    let v = [1.0, 0.5, 0.5];
    assert_eq!(project_to_boundary(&v, simplex(2.0)).unwrap(), v.to_vec());
    let shifted = project_to_boundary(&[3.0, 3.0], |p: &[f64]| p.iter().all(|&v| v <= 2.0)).unwrap();
    assert!(shifted.iter().all(|v| (v - 2.0).abs() < 1e-8));
}

#[test]
fn poa_examples() {
    let opts = PoaOptions::default();
    let r = cp_poa(|p| p.iter().sum(), 2, 2.0, opts).unwrap();
    assert!(r.probs.iter().all(|&p| (p - 1.0).abs() < 1e-9));
    let r = cp_poa(|p| p.iter().map(|&x| 0.5 * -(-x).exp_m1()).sum(), 2, 1.0, opts).unwrap();
    let best = -(-0.5f64).exp_m1();
    assert!((r.value - best).abs() <= opts.epsilon * best);
    assert!(r.probs.iter().all(|&p| (p - 0.5).abs() < 0.1));
}

#[test]
fn poa_matches_grid_search() {
    let cfg = NetworkConfig::reference();
    let catalog = reference_catalog(3, 1.5);
    let c = compute_kkt_coefficients(&catalog, &cfg).unwrap();
    let a = catalog.popularity.clone();
    let opts = PoaOptions::default();
    let r = cp_poa(|p| c.objective(&a, p), 3, 1.5, opts).unwrap();
    let grid = grid_best(&c, &a, 1.5);
    assert!((r.value - grid).abs() <= 2.0 * opts.epsilon, "{} vs {grid}", r.value);
    assert!(r.probs.iter().sum::<f64>() <= 1.5 + 1e-9);
}

#[test]
fn poa_bracket_histories() {
    let cfg = NetworkConfig::reference();
    let catalog = reference_catalog(4, 2.0);
    let c = compute_kkt_coefficients(&catalog, &cfg).unwrap();
    let a = catalog.popularity.clone();
    let r = cp_poa(|p| c.objective(&a, p), 4, 2.0, PoaOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.upper_bounds.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(r.best_values.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.upper_bounds.iter().zip(&r.best_values).all(|(u, b)| u >= b));
}

#[test]
fn poa_tracks_co_on_noise_limited_objective() {
    let cfg = NetworkConfig::reference();
    let opts = PoaOptions::default();
    for (f, cap) in [(4, 2.0), (6, 2.0), (20, 10.0)] {
        let catalog = reference_catalog(f, cap);
        let c = compute_kkt_coefficients(&catalog, &cfg).unwrap();
        let a = catalog.popularity.clone();
        let r = cp_poa(|p| c.objective(&a, p), f, cap, opts).unwrap();
        let co = cp_co(&catalog, &cfg, 1e-6).unwrap();
        assert!((r.value - co.value).abs() <= opts.epsilon + 1e-6, "F {f}: {} vs {}", r.value, co.value);
        assert!(r.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(r.probs.iter().sum::<f64>() <= cap + 1e-9);
    }
}

#[test]
fn poa_rejects_decreasing_objective() {
    let r = cp_poa(|p| -p.iter().sum::<f64>(), 3, 1.0, PoaOptions::default());
    assert!(matches!(r, Err(Error::ContractViolation(_))));
}
