//! Distribution of the inverse biased received power `x = d^α / P̄` of the
//! strongest node of a PPP tier under LOS/NLOS blockage.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkConfig;

/// A thinned PPP tier seen from a receiver at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierSpec {
    /// Node density (nodes/m²).
    pub density: f64,
    /// Effective biased power γ·P·M²·B.
    pub p_bar: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta: f64,
    /// When false, NLOS nodes are ignored entirely.
    pub nlos: bool,
}

/// `1 − e^-z (1 + z)`, accurate for small `z`.
pub(crate) fn g_fn(z: f64) -> f64 {
    if z < 1e-2 {
        // z²/2 − z³/3 + z⁴/8 − z⁵/30 + z⁶/144
        let z2 = z * z;
        z2 * (0.5 - z / 3.0 + z2 / 8.0 - z2 * z / 30.0 + z2 * z2 / 144.0)
    } else {
        -(-z).exp() * (1.0 + z) + 1.0
    }
}

/// `z²/2 − g(z)`, accurate for small `z`.
pub(crate) fn h_fn(z: f64) -> f64 {
    if z < 1e-2 {
        let z3 = z * z * z;
        z3 * (1.0 / 3.0 - z / 8.0 + z * z / 30.0 - z3 / 144.0 + z3 * z / 840.0)
    } else {
        0.5 * z * z - g_fn(z)
    }
}

impl TierSpec {
    pub fn new(density: f64, p_bar: f64, cfg: &NetworkConfig) -> Self {
        TierSpec {
            density,
            p_bar,
            alpha_los: cfg.alpha_los,
            alpha_nlos: cfg.alpha_nlos,
            beta: cfg.beta,
            nlos: true,
        }
    }

    /// BS tier thinned by caching probability `p`.
    pub fn bs(cfg: &NetworkConfig, p: f64) -> Self {
        Self::new(p * cfg.lambda_bs, cfg.p_bar_bs(), cfg)
    }

    pub fn rn(cfg: &NetworkConfig) -> Self {
        Self::new(cfg.lambda_rn, cfg.p_bar_rn(), cfg)
    }

    pub fn los_only(mut self) -> Self {
        self.nlos = false;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    /// Distance at which inverse power `x` is reached in a given link state.
    pub fn radius(&self, x: f64, los: bool) -> f64 {
        let alpha = if los { self.alpha_los } else { self.alpha_nlos };
        (x * self.p_bar).powf(1.0 / alpha)
    }

    // ∫₀^R 2π v e^{-βv} dv and ∫₀^R 2π v (1 − e^{-βv}) dv
    fn los_area(&self, r: f64) -> f64 {
        if self.beta == 0.0 {
            PI * r * r
        } else {
            2.0 * PI * g_fn(self.beta * r) / (self.beta * self.beta)
        }
    }

    fn nlos_area(&self, r: f64) -> f64 {
        if !self.nlos {
            0.0
        } else if self.beta == 0.0 {
            0.0
        } else {
            2.0 * PI * h_fn(self.beta * r) / (self.beta * self.beta)
        }
    }

    /// Intensity measure `Λ([0, x])`.
    pub fn intensity(&self, x: f64) -> f64 {
        if x <= 0.0 || self.density == 0.0 {
            return 0.0;
        }
        let (rl, rn) = (self.radius(x, true), self.radius(x, false));
        self.density * (self.los_area(rl) + self.nlos_area(rn))
    }

    /// Per-state derivatives `(dΛ_L/dx, dΛ_N/dx)`.
    pub fn intensity_deriv_parts(&self, x: f64) -> (f64, f64) {
        if x <= 0.0 || self.density == 0.0 {
            return (0.0, 0.0);
        }
        let rl = self.radius(x, true);
        let los = 2.0 * PI * self.density * rl * rl * (-self.beta * rl).exp() / (self.alpha_los * x);
        let nlos = if self.nlos {
            let rn = self.radius(x, false);
            2.0 * PI * self.density * rn * rn * (-(-self.beta * rn).exp_m1()) / (self.alpha_nlos * x)
        } else {
            0.0
        };
        (los, nlos)
    }

    pub fn intensity_deriv(&self, x: f64) -> f64 {
        let (l, n) = self.intensity_deriv_parts(x);
        l + n
    }

    /// Probability that the strongest node at inverse power `x` is LOS.
    pub fn los_share(&self, x: f64) -> f64 {
        let (l, n) = self.intensity_deriv_parts(x);
        if l + n > 0.0 {
            l / (l + n)
        } else {
            1.0
        }
    }

    /// CDF of the smallest inverse biased received power.
    pub fn cdf(&self, x: f64) -> f64 {
        -(-self.intensity(x)).exp_m1()
    }

    /// Density `Λ'(x) e^{-Λ(x)}`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.intensity_deriv(x) * (-self.intensity(x)).exp()
    }

    /// Solves `Λ(x) = t` for `x`.
    pub fn inverse_intensity(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("intensity level {t} invalid")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if self.density == 0.0 {
            return Err(Error::DegenerateDistribution("empty tier has no finite quantiles".into()));
        }
        // Λ grows like x^{2/α}; start from the smaller unblocked-disc guess
        let disc = (t / (PI * self.density)).ln() / 2.0;
        let mut u = disc * self.alpha_los.min(self.alpha_nlos) - self.p_bar.ln();
        if self.nlos {
            u = u.min(disc * self.alpha_nlos - self.p_bar.ln());
        }
        self.solve_log(t, u, 1.0, 0.0)
    }

    /// Solves `scale·Λ(x) + kappa·x = y` for `x`.
    pub fn inverse_shifted(&self, scale: f64, kappa: f64, y: f64) -> Result<f64> {
        if !(scale > 0.0 && kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad level map ({scale}, {kappa})")));
        }
        if kappa == 0.0 {
            return self.inverse_intensity(y / scale);
        }
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::InvalidArgument(format!("level {y} invalid")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let mut x = y / kappa;
        if self.density > 0.0 {
            x = x.min(self.inverse_intensity(y / scale)?);
        }
        self.solve_log(y, x.ln(), scale, kappa)
    }

    // safeguarded Newton in ln x on the increasing map scale·Λ(x) + kappa·x
    fn solve_log(&self, y: f64, mut u: f64, scale: f64, kappa: f64) -> Result<f64> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..300 {
            let x = u.exp();
            let f = scale * self.intensity(x) + kappa * x - y;
            if !f.is_finite() || f > 0.0 {
                hi = hi.min(u);
            } else {
                lo = lo.max(u);
            }
            if f.abs() <= 1e-14 * y {
                return Ok(x);
            }
            let d = (scale * self.intensity_deriv(x) + kappa) * x;
            let mut next = u - (f / d).clamp(-8.0, 8.0);
            if !(next.is_finite() && next > lo && next < hi) || !(d > 0.0) || !f.is_finite() {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    _ => u,
                };
            }
            if (next - u).abs() < 1e-15 * u.abs().max(1.0) {
                return Ok(next.exp());
            }
            u = next;
        }
        Err(Error::Numeric(format!("level inversion failed for {y}")))
    }
}

/// CDF of the smallest inverse biased received power of `tier`.
pub fn inverse_power_cdf(tier: &TierSpec, x: f64) -> f64 {
    tier.cdf(x)
}

/// Density of the smallest inverse biased received power of `tier`.
pub fn inverse_power_pdf(tier: &TierSpec, x: f64) -> f64 {
    tier.pdf(x)
}
