//! Closed-form SBOP when interference is neglected.
//!
//! The serving SNR exceeds `ν` iff `ψ/g ≤ ξ` with `ψ = d^α`, `g` the fading
//! power and `ξ = P M² γ / (σ² ν)`. The points `ψ/g` form a PPP whose
//! intensity measure on `[0, ξ]` is
//!
//! `T(ξ) = c ξ^{κ_N} + I_L(ξ) − I_N(ξ)`,
//!
//! where the first term counts NLOS-law nodes without blockage thinning and
//! `I_k` is the blockage-weighted double integral of state `k`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::association::two_hop_probability;
use crate::error::{Error, Result};
use crate::model::{CachingPolicy, ContentCatalog, NetworkConfig};
use crate::numeric::kronrod::{self, Tolerance};

/// Per-file coefficients of `Σ K_n a_n (1 − e^{−p_n T_n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCoefficients {
    pub k: Vec<f64>,
    pub t: Vec<f64>,
}

impl KktCoefficients {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Noise-limited SBOP of caching vector `p`.
    pub fn objective(&self, popularity: &[f64], p: &[f64]) -> f64 {
        self.k
            .iter()
            .zip(&self.t)
            .zip(popularity.iter().zip(p))
            .map(|((&k, &t), (&a, &pn))| k * a * -(-pn * t).exp_m1())
            .sum()
    }

    /// `∂/∂p_n` of [`objective`](Self::objective).
    pub fn gradient(&self, popularity: &[f64], p: &[f64]) -> Vec<f64> {
        self.k
            .iter()
            .zip(&self.t)
            .zip(popularity.iter().zip(p))
            .map(|((&k, &t), (&a, &pn))| k * a * t * (-pn * t).exp())
            .collect()
    }
}

fn inner_tol() -> Tolerance {
    Tolerance {
        abs: 1e-14,
        rel: 1e-11,
        max_intervals: 200,
    }
}

fn outer_tol() -> Tolerance {
    Tolerance {
        abs: 1e-14,
        rel: 1e-10,
        max_intervals: 500,
    }
}

/// SNR scale `ξ = P M² γ / (σ² ν)` of a transmitter with power `power`.
pub fn snr_scale(power: f64, nu: f64, cfg: &NetworkConfig) -> f64 {
    power * cfg.gain_main * cfg.gain_main * cfg.gamma_intercept / (cfg.noise_power * nu)
}

/// `c ξ^{κ_N}`: the NLOS-law term without blockage thinning.
pub fn unthinned_term(density: f64, xi: f64, cfg: &NetworkConfig) -> f64 {
    let n = cfg.n_nlos as f64;
    let kappa = 2.0 / cfg.alpha_nlos;
    PI * density * gamma(n + kappa) / (n.powf(kappa) * gamma(n)) * xi.powf(kappa)
}

// w^N ∫_0^1 v^{-N-1} e^{-N w / v} dv, integrated in φ = ln(v / w)
fn inner_scaled(n: f64, w: f64) -> Result<f64> {
    let lo = -(800.0 / n).ln();
    let hi = (-w.ln()).min(40.0);
    if hi <= lo {
        return Ok(0.0);
    }
    let f = |phi: f64| (-n * phi - n * (-phi).exp()).exp();
    if lo < 0.0 && hi > 0.0 {
        Ok(kronrod::integrate(f, lo, 0.0, inner_tol())? + kronrod::integrate(f, 0.0, hi, inner_tol())?)
    } else {
        kronrod::integrate(f, lo, hi, inner_tol())
    }
}

/// Blockage-weighted term `I_k(ξ)` of link state `los`, by nested quadrature.
pub fn blocked_term(density: f64, xi: f64, los: bool, cfg: &NetworkConfig) -> Result<f64> {
    if density == 0.0 || xi == 0.0 {
        return Ok(0.0);
    }
    let alpha = cfg.alpha(los);
    let n = cfg.nakagami(los) as f64;
    // distance in units of ξ^{1/α}: w = σ^α
    let reach = xi.powf(1.0 / alpha);
    let sigma_max = (100.0 / n).powf(1.0 / alpha);
    let mut failure = None;
    let integral = kronrod::integrate(
        |sigma| {
            if sigma == 0.0 {
                return 0.0;
            }
            match inner_scaled(n, sigma.powf(alpha)) {
                Ok(v) => sigma * v * (-cfg.beta * reach * sigma).exp(),
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        sigma_max,
        outer_tol(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let prefactor = 2.0 * PI * density * (n * n.ln() - ln_gamma(n)).exp();
    Ok(prefactor * xi.powf(2.0 / alpha) * integral)
}

/// `Y(ξ) = I_L(ξ) − I_N(ξ)`.
pub fn y_term(density: f64, xi: f64, cfg: &NetworkConfig) -> Result<f64> {
    Ok(blocked_term(density, xi, true, cfg)? - blocked_term(density, xi, false, cfg)?)
}

/// Intensity `T(ξ) = c ξ^{κ_N} + Y(ξ)` of tier `density`: the serving link
/// succeeds with probability `1 − e^{−T}`.
pub fn coverage_exponent(density: f64, xi: f64, cfg: &NetworkConfig) -> Result<f64> {
    let t = unthinned_term(density, xi, cfg) + y_term(density, xi, cfg)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Numeric(format!(
            "coverage exponent {t} invalid (density {density}, xi {xi})"
        )));
    }
    Ok(t)
}

/// `(K_n, T_n)` for every file of `catalog`.
pub fn compute_kkt_coefficients(catalog: &ContentCatalog, cfg: &NetworkConfig) -> Result<KktCoefficients> {
    cfg.validate()?;
    let p2 = two_hop_probability(cfg)?;
    let p1 = 1.0 - p2;
    let pairs = catalog
        .sinr_thresholds
        .par_iter()
        .map(|&nu| {
            let t = coverage_exponent(cfg.lambda_bs, snr_scale(cfg.p_bs, nu, cfg), cfg)?;
            let relay = if p2 > 0.0 {
                coverage_exponent(cfg.lambda_rn, snr_scale(cfg.p_rn, nu, cfg), cfg)?
            } else {
                0.0
            };
            Ok((p1 - (-relay).exp_m1() * p2, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let (k, t) = pairs.into_iter().unzip();
    Ok(KktCoefficients { k, t })
}

/// Noise-limited SBOP of `policy`.
pub fn sbop_noise_limited(policy: &CachingPolicy, catalog: &ContentCatalog, cfg: &NetworkConfig) -> Result<f64> {
    if policy.len() != catalog.f_count {
        return Err(Error::InvalidPolicy(format!(
            "policy has {} entries for {} files",
            policy.len(),
            catalog.f_count
        )));
    }
    policy.validate(catalog.cache_size)?;
    let coeffs = compute_kkt_coefficients(catalog, cfg)?;
    Ok(coeffs.objective(&catalog.popularity, &policy.probs).clamp(0.0, 1.0))
}
