//! KKT-based placement for the noise-limited objective
//! `Σ K_n a_n (1 − e^{−p_n T_n})` under `Σ p_n ≤ C`.

use serde::{Deserialize, Serialize};

use crate::analytic::{compute_kkt_coefficients, KktCoefficients};
use crate::error::{Error, Result};
use crate::model::{ContentCatalog, NetworkConfig};

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoResult {
    pub probs: Vec<f64>,
    pub value: f64,
    /// Final budget multiplier, `0` when the budget does not bind.
    pub multiplier: f64,
    pub iterations: usize,
}

/// Stationary caching vector for budget multiplier `eps`.
///
/// `p_n = clamp(ln(K_n a_n T_n / eps) / T_n, 0, 1)`.
pub fn caching_prob_from_multiplier(eps: f64, coeffs: &KktCoefficients, popularity: &[f64]) -> Vec<f64> {
    coeffs
        .k
        .iter()
        .zip(&coeffs.t)
        .zip(popularity)
        .map(|((&k, &t), &a)| {
            let slope = k * a * t;
            if !(slope > 0.0) || eps >= slope {
                0.0
            } else if eps <= slope * (-t).exp() {
                1.0
            } else {
                ((slope / eps).ln() / t).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// CP-CO for precomputed coefficients.
pub fn cp_co_with(
    coeffs: &KktCoefficients,
    popularity: &[f64],
    cache_size: f64,
    tolerance: f64,
) -> Result<CoResult> {
    let f = coeffs.len();
    if popularity.len() != f {
        return Err(Error::InvalidArgument(format!(
            "{} popularities for {f} coefficient pairs",
            popularity.len()
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be positive")));
    }
    if !(cache_size >= 0.0) {
        return Err(Error::InvalidArgument(format!("cache size {cache_size} invalid")));
    }
    if coeffs.k.iter().chain(&coeffs.t).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument("KKT coefficients must be finite and nonnegative".into()));
    }
    if f as f64 <= cache_size {
        let probs = vec![1.0; f];
        let value = coeffs.objective(popularity, &probs);
        return Ok(CoResult {
            probs,
            value,
            multiplier: 0.0,
            iterations: 0,
        });
    }
    let slopes: Vec<(f64, f64)> = coeffs
        .k
        .iter()
        .zip(&coeffs.t)
        .zip(popularity)
        .map(|((&k, &t), &a)| (k * a * t, k * a * t * (-t).exp()))
        .filter(|&(s, _)| s > 0.0)
        .collect();
    let mut hi = slopes.iter().map(|s| s.0).fold(0.0, f64::max);
    let mut lo = slopes.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    if slopes.is_empty() {
        let probs = vec![0.0; f];
        return Ok(CoResult {
            probs,
            value: 0.0,
            multiplier: 0.0,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    let mut mid = hi;
    let mut probs = caching_prob_from_multiplier(hi, coeffs, popularity);
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let trial = caching_prob_from_multiplier(mid, coeffs, popularity);
        let total: f64 = trial.iter().sum();
        if total > cache_size {
            lo = mid;
        } else {
            hi = mid;
            probs = trial;
            if cache_size - total < tolerance {
                break;
            }
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let value = coeffs.objective(popularity, &probs);
    Ok(CoResult {
        probs,
        value,
        multiplier: mid,
        iterations,
    })
}

/// CP-CO: noise-limited optimum of `catalog` under `cfg`.
pub fn cp_co(catalog: &ContentCatalog, cfg: &NetworkConfig, tolerance: f64) -> Result<CoResult> {
    let coeffs = compute_kkt_coefficients(catalog, cfg)?;
    cp_co_with(&coeffs, &catalog.popularity, catalog.cache_size, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coeffs(k: &[f64], t: &[f64]) -> KktCoefficients {
        KktCoefficients {
            k: k.to_vec(),
            t: t.to_vec(),
        }
    }

    #[test]
    fn regimes() {
        let c = coeffs(&[1.0, 1.0], &[2.0, 0.5]);
        let a = [0.6, 0.4];
        assert_eq!(caching_prob_from_multiplier(1.2, &c, &a), vec![0.0, 0.0]);
        assert_eq!(caching_prob_from_multiplier(0.05, &c, &a), vec![1.0, 1.0]);
    }

    #[test]
    fn slack_budget_caches_everything() {
        let c = coeffs(&[1.0, 1.0], &[1.0, 1.0]);
        let r = cp_co_with(&c, &[0.5, 0.5], 2.0, 1e-6).unwrap();
        assert_eq!(r.probs, vec![1.0, 1.0]);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn symmetric_split() {
        let c = coeffs(&[1.0, 1.0], &[1.0, 1.0]);
        let r = cp_co_with(&c, &[0.5, 0.5], 1.0, 1e-6).unwrap();
        assert_relative_eq!(r.probs[0], 0.5, epsilon = 1e-6);
        assert_relative_eq!(r.probs[1], 0.5, epsilon = 1e-6);
        assert!(r.probs.iter().sum::<f64>() <= 1.0);
    }
}
