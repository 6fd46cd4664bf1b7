//! Network parameters and the elementary model functions shared by the
//! analytic engine and the simulator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density at room temperature (dBm/Hz).
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Physical and geometric parameters, all in linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// BS density (nodes/m²).
    pub lambda_bs: f64,
    /// RN density (nodes/m²).
    pub lambda_rn: f64,
    /// UE density (nodes/m²), only used for association snapshots.
    pub lambda_ue: f64,
    /// BS transmit power (W).
    pub p_bs: f64,
    /// RN transmit power (W).
    pub p_rn: f64,
    pub b_bs: f64,
    pub b_rn: f64,
    /// Subchannel bandwidth (Hz).
    pub bandwidth: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Blockage density (1/m).
    pub beta: f64,
    /// Mainlobe beamwidth (rad).
    pub theta: f64,
    pub gain_main: f64,
    pub gain_side: f64,
    pub n_los: u32,
    pub n_nlos: u32,
    /// Path-loss intercept at 1 m.
    pub gamma_intercept: f64,
    /// Receiver noise power (W).
    pub noise_power: f64,
    /// Side of the Monte Carlo square (m).
    pub area_side: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl NetworkConfig {
    /// Reference parameter set used throughout the evaluation.
    pub fn reference() -> Self {
        let bandwidth = 100e6;
        NetworkConfig {
            lambda_bs: 1e-5,
            lambda_rn: 1e-5,
            lambda_ue: 1e-4,
            p_bs: dbm_to_watts(30.0),
            p_rn: dbm_to_watts(30.0),
            b_bs: 1.0,
            b_rn: 1.0,
            bandwidth,
            alpha_los: 2.5,
            alpha_nlos: 4.0,
            beta: 4e-4,
            theta: 30f64.to_radians(),
            gain_main: db_to_linear(10.0),
            gain_side: db_to_linear(-10.0),
            n_los: 3,
            n_nlos: 2,
            gamma_intercept: free_space_intercept(28e9),
            noise_power: thermal_noise_watts(bandwidth, 10.0),
            area_side: 800.0,
        }
    }

    /// Checks every parameter invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_bs", self.lambda_bs),
            ("p_bs", self.p_bs),
            ("p_rn", self.p_rn),
            ("b_bs", self.b_bs),
            ("b_rn", self.b_rn),
            ("bandwidth", self.bandwidth),
            ("gamma_intercept", self.gamma_intercept),
            ("area_side", self.area_side),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("lambda_rn", self.lambda_rn), ("lambda_ue", self.lambda_ue)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(name, format!("must be nonnegative, got {v}")));
            }
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::validation("noise_power", "must be nonnegative"));
        }
        if !(self.alpha_los >= 2.0 && self.alpha_los.is_finite()) {
            return Err(Error::validation("alpha_los", "must be at least 2"));
        }
        if !(self.alpha_nlos > self.alpha_los && self.alpha_nlos.is_finite()) {
            return Err(Error::validation("alpha_nlos", "must exceed alpha_los"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::validation("beta", "must be nonnegative"));
        }
        if !(self.theta > 0.0 && self.theta <= 2.0 * PI) {
            return Err(Error::validation("theta", "must lie in (0, 2π]"));
        }
        if !(self.gain_side > 0.0 && self.gain_main > self.gain_side) {
            return Err(Error::validation(
                "gain_main",
                "gains must satisfy gain_main > gain_side > 0",
            ));
        }
        if self.n_los == 0 {
            return Err(Error::validation("n_los", "must be at least 1"));
        }
        if self.n_nlos == 0 {
            return Err(Error::validation("n_nlos", "must be at least 1"));
        }
        Ok(())
    }

    /// Mean received power scale γ·P·M²·B of a BS (biased).
    pub fn p_bar_bs(&self) -> f64 {
        self.gamma_intercept * self.p_bs * self.gain_main * self.gain_main * self.b_bs
    }

    /// Mean received power scale γ·P·M²·B of an RN (biased).
    pub fn p_bar_rn(&self) -> f64 {
        self.gamma_intercept * self.p_rn * self.gain_main * self.gain_main * self.b_rn
    }

    pub fn gain_pattern(&self) -> GainPattern {
        // validate() already bounds theta, so this cannot fail for a valid config
        gain_distribution(self.theta, self.gain_main, self.gain_side)
            .expect("theta validated")
    }

    /// Nakagami shape for a link state.
    pub fn nakagami(&self, los: bool) -> u32 {
        if los {
            self.n_los
        } else {
            self.n_nlos
        }
    }

    pub fn alpha(&self, los: bool) -> f64 {
        if los {
            self.alpha_los
        } else {
            self.alpha_nlos
        }
    }
}

/// File catalogue with Zipf popularity and per-file rate targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentCatalog {
    pub f_count: usize,
    pub delta: f64,
    pub cache_size: f64,
    pub popularity: Vec<f64>,
    /// Target rates τ_n (bit/s).
    pub target_rates: Vec<f64>,
    /// SINR thresholds ν_n = 2^(τ_n/B) − 1.
    pub sinr_thresholds: Vec<f64>,
}

impl ContentCatalog {
    /// Catalogue with rates evenly spaced over `[tau_min, tau_max]`, ascending in file index.
    pub fn new(
        f_count: usize,
        delta: f64,
        cache_size: f64,
        tau_min: f64,
        tau_max: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        if !(tau_min > 0.0 && tau_max >= tau_min) {
            return Err(Error::validation("tau_min_bps", "need 0 < tau_min <= tau_max"));
        }
        let target_rates: Vec<f64> = (0..f_count)
            .map(|i| {
                if f_count == 1 {
                    tau_min
                } else {
                    tau_min + (tau_max - tau_min) * i as f64 / (f_count - 1) as f64
                }
            })
            .collect();
        Self::with_rates(f_count, delta, cache_size, target_rates, bandwidth)
    }

    /// Catalogue with explicit per-file rates.
    pub fn with_rates(
        f_count: usize,
        delta: f64,
        cache_size: f64,
        target_rates: Vec<f64>,
        bandwidth: f64,
    ) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::validation("delta", "must be nonnegative"));
        }
        let popularity = zipf_popularity(f_count, delta)?;
        if target_rates.len() != f_count {
            return Err(Error::validation("target_rates", "length must equal f_count"));
        }
        if !(cache_size >= 1.0 && cache_size <= f_count as f64) {
            return Err(Error::validation(
                "cache_size",
                format!("must lie in [1, {f_count}], got {cache_size}"),
            ));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::validation("bandwidth_hz", "must be positive"));
        }
        let sinr_thresholds: Vec<f64> = target_rates
            .iter()
            .map(|&t| rate_to_sinr_threshold(t, bandwidth))
            .collect();
        if sinr_thresholds.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::validation("target_rates", "thresholds must be positive and finite"));
        }
        Ok(ContentCatalog {
            f_count,
            delta,
            cache_size,
            popularity,
            target_rates,
            sinr_thresholds,
        })
    }

    /// Same catalogue with every file's SINR threshold replaced.
    pub fn with_thresholds(&self, thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() != self.f_count || thresholds.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::validation("sinr_thresholds", "need f_count positive values"));
        }
        let mut out = self.clone();
        out.sinr_thresholds = thresholds;
        Ok(out)
    }
}

/// ν = 2^(τ/B) − 1.
pub fn rate_to_sinr_threshold(rate: f64, bandwidth: f64) -> f64 {
    (rate / bandwidth * std::f64::consts::LN_2).exp_m1()
}

/// Per-file caching probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachingPolicy {
    pub probs: Vec<f64>,
}

impl CachingPolicy {
    pub fn new(probs: Vec<f64>, cache_size: f64) -> Result<Self> {
        let policy = CachingPolicy { probs };
        policy.validate(cache_size)?;
        Ok(policy)
    }

    pub fn validate(&self, cache_size: f64) -> Result<()> {
        if let Some(p) = self.probs.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
            return Err(Error::InvalidPolicy(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = self.probs.iter().sum();
        if total > cache_size + 1e-9 {
            return Err(Error::InvalidPolicy(format!(
                "total caching probability {total} exceeds cache size {cache_size}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Cache the `C` most popular files.
pub fn mpc_policy(catalog: &ContentCatalog) -> CachingPolicy {
    let c = catalog.cache_size;
    let probs = (0..catalog.f_count)
        .map(|i| (c - i as f64).clamp(0.0, 1.0))
        .collect();
    CachingPolicy { probs }
}

/// Cache every file with probability `C/F`.
pub fn uc_policy(catalog: &ContentCatalog) -> CachingPolicy {
    let p = catalog.cache_size / catalog.f_count as f64;
    CachingPolicy {
        probs: vec![p; catalog.f_count],
    }
}

/// Antenna gain outcome on an interfering link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainOutcome {
    pub gain: f64,
    pub prob: f64,
}

/// The three sector-antenna gain products and their probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPattern {
    pub outcomes: [GainOutcome; 3],
}

impl GainPattern {
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|o| o.gain * o.prob).sum()
    }
}

/// Zipf popularity `a_n = n^-δ / Σ m^-δ`.
pub fn zipf_popularity(f_count: usize, delta: f64) -> Result<Vec<f64>> {
    if f_count == 0 {
        return Err(Error::InvalidArgument("f_count must be at least 1".into()));
    }
    let raw: Vec<f64> = (1..=f_count).map(|n| (n as f64).powf(-delta)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// LOS probability `e^-βr` of a link of length `r`.
pub fn los_probability(r: f64, beta: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be nonnegative, got {r}")));
    }
    Ok((-beta * r).exp())
}

/// Gain products `MM`, `Mm`, `mm` with their probabilities for beamwidth `theta`.
pub fn gain_distribution(theta: f64, gain_main: f64, gain_side: f64) -> Result<GainPattern> {
    if !(theta > 0.0 && theta <= 2.0 * PI) {
        return Err(Error::InvalidArgument(format!("theta {theta} outside (0, 2π]")));
    }
    let q = theta / (2.0 * PI);
    Ok(GainPattern {
        outcomes: [
            GainOutcome {
                gain: gain_main * gain_main,
                prob: q * q,
            },
            GainOutcome {
                gain: gain_main * gain_side,
                prob: 2.0 * q * (1.0 - q),
            },
            GainOutcome {
                gain: gain_side * gain_side,
                prob: (1.0 - q) * (1.0 - q),
            },
        ],
    })
}

/// `γ r^-α`.
pub fn path_loss(r: f64, alpha: f64, gamma_intercept: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be positive, got {r}")));
    }
    Ok(gamma_intercept * r.powf(-alpha))
}

pub fn dbm_to_watts(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

pub fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Free-space path gain at 1 m, `(c / 4πf)²`.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    let v = SPEED_OF_LIGHT / (4.0 * PI * carrier_hz);
    v * v
}

/// Thermal noise over `bandwidth` plus a receiver noise figure.
pub fn thermal_noise_watts(bandwidth: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth.log10() + noise_figure_db)
}
