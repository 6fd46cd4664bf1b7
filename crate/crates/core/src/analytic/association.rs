//! User association and relaying probabilities and the association-weighted
//! densities of the serving inverse power.
//!
//! Integrals over inverse power are carried out in the tier's own intensity
//! variable `t = Λ(x)`, in which `F̃(x) dx = e^{-t} dt`.

use serde::{Deserialize, Serialize};

use super::tier::TierSpec;
use crate::error::{Error, Result};
use crate::model::NetworkConfig;
use crate::numeric::kronrod::{self, Tolerance};
use crate::numeric::legendre::gauss_legendre;

/// Upper truncation of intensity-variable integrals (`e^-T` is negligible).
pub(crate) const T_MAX: f64 = 60.0;

/// Hop whose serving inverse power a weighted density describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    Bu,
    Br,
    Ru,
}

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-13,
        rel: 1e-11,
        max_intervals: 4000,
    }
}

/// `∫_{t0}^∞ e^{-t} g(t) dt` for bounded `g`, by adaptive quadrature with
/// breakpoints spread over the first decades of `t`.
pub(crate) fn exp_weighted<F: FnMut(f64) -> f64>(mut g: F, t0: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = t0;
    let mut width = 1e-6f64.max(t0 * 1e-3);
    while lo < t0 + T_MAX {
        let hi = (lo + width).min(t0 + T_MAX);
        total += kronrod::integrate(|t| (-t).exp() * g(t), lo, hi, tol())?;
        lo = hi;
        width *= 4.0;
    }
    Ok(total)
}

fn rn_cdf_at_bs_level(bs: &TierSpec, rn: &TierSpec, t: f64) -> Result<f64> {
    if rn.density == 0.0 {
        return Ok(0.0);
    }
    Ok(rn.cdf(bs.inverse_intensity(t)?))
}

/// One-hop association weight `χ_BU = 1 − F_RN(x) F_BSn(x)` for arbitrary tiers.
pub fn one_hop_weight(bsn: &TierSpec, rn: &TierSpec, x: f64) -> f64 {
    (1.0 - rn.cdf(x) * bsn.cdf(x)).clamp(0.0, 1.0)
}

/// `(χ_BU, χ_BR, χ_RU)` at inverse power `x` for a file cached with probability `p_n`.
pub fn uar_probabilities(p_n: f64, x: f64, cfg: &NetworkConfig) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&p_n) || !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("need p_n in [0,1] and x >= 0, got ({p_n}, {x})")));
    }
    let bsn = TierSpec::bs(cfg, p_n);
    let rn = TierSpec::rn(cfg);
    if bsn.density == 0.0 {
        // no caching BS exists: the one-hop tier is empty
        return Ok((1.0, 0.0, 0.0));
    }
    let f_bsn = bsn.cdf(x);
    let chi_bu = one_hop_weight(&bsn, &rn, x);
    let t0 = bsn.intensity(x);
    let chi_br = if rn.density == 0.0 {
        0.0
    } else {
        exp_weighted(|t| rn_cdf_at_bs_level(&bsn, &rn, t).unwrap_or(1.0), t0)?
    };
    let chi_ru = 0.5 * (1.0 - f_bsn * f_bsn);
    Ok((
        chi_bu,
        chi_br.clamp(0.0, 1.0),
        chi_ru.clamp(0.0, 1.0),
    ))
}

/// Normaliser `∫ f(x) χ(x) dx` of a weighted density.
pub fn association_normalizer(link: Link, p_n: f64, cfg: &NetworkConfig) -> Result<f64> {
    let bsn = TierSpec::bs(cfg, p_n);
    let rn = TierSpec::rn(cfg);
    match link {
        Link::Bu | Link::Br => {
            if bsn.density == 0.0 {
                return Ok(0.0);
            }
            let br = if rn.density == 0.0 {
                0.0
            } else {
                exp_weighted(
                    |t| -(-t).exp_m1() * rn_cdf_at_bs_level(&bsn, &rn, t).unwrap_or(1.0),
                    0.0,
                )?
            };
            Ok(if link == Link::Bu { 1.0 - br } else { br })
        }
        Link::Ru => {
            if rn.density == 0.0 || bsn.density == 0.0 {
                return Ok(0.0);
            }
            exp_weighted(
                |t| {
                    let f = rn.inverse_intensity(t).map(|x| bsn.cdf(x)).unwrap_or(1.0);
                    0.5 * (1.0 - f * f)
                },
                0.0,
            )
        }
    }
}

/// Association-weighted density of the serving inverse power on `link`.
pub fn weighted_pdf(link: Link, p_n: f64, x: f64, cfg: &NetworkConfig) -> Result<f64> {
    let norm = association_normalizer(link, p_n, cfg)?;
    if !(norm > 0.0) {
        return Err(Error::DegenerateDistribution(format!(
            "{link:?} weighted density has zero normaliser (p_n = {p_n})"
        )));
    }
    let (bu, br, ru) = uar_probabilities(p_n, x, cfg)?;
    let value = match link {
        Link::Bu => TierSpec::bs(cfg, p_n).pdf(x) * bu,
        Link::Br => TierSpec::bs(cfg, p_n).pdf(x) * br,
        Link::Ru => TierSpec::rn(cfg).pdf(x) * ru,
    };
    Ok(value / norm)
}

/// Probability that the typical UE is served over a two-hop link.
pub fn two_hop_probability(cfg: &NetworkConfig) -> Result<f64> {
    let bs = TierSpec::bs(cfg, 1.0);
    let rn = TierSpec::rn(cfg);
    if rn.density == 0.0 {
        return Ok(0.0);
    }
    let v = exp_weighted(|t| rn_cdf_at_bs_level(&bs, &rn, t).unwrap_or(1.0), 0.0)?;
    Ok((0.5 * v).clamp(0.0, 0.5))
}

const TABLE_U_MIN: f64 = -40.0;
const TABLE_U_MAX: f64 = 40.0;
const TABLE_STEP: f64 = 0.02;

/// Tabulated `G(τ) = F_RN(x_BS(τ))`: the RN-tier CDF at the inverse power
/// where the full BS tier reaches intensity `τ`. Independent of caching, so a
/// file-thinned tier reuses it through `x_BSn(t) = x_BS(t/p)`.
#[derive(Debug, Clone)]
pub struct RelayTable {
    values: Vec<f64>,
    slopes: Vec<f64>,
    empty: bool,
}

impl RelayTable {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        let bs = TierSpec::bs(cfg, 1.0);
        let rn = TierSpec::rn(cfg);
        if rn.density == 0.0 {
            return Ok(RelayTable {
                values: Vec::new(),
                slopes: Vec::new(),
                empty: true,
            });
        }
        let count = ((TABLE_U_MAX - TABLE_U_MIN) / TABLE_STEP).round() as usize + 1;
        let mut values = Vec::with_capacity(count);
        let mut slopes = Vec::with_capacity(count);
        for i in 0..count {
            let tau = (TABLE_U_MIN + TABLE_STEP * i as f64).exp();
            let x = bs.inverse_intensity(tau)?;
            let lrn = rn.intensity(x);
            let g = -(-lrn).exp_m1();
            // dG/du = τ e^{-Λ_RN} Λ_RN'(x) / Λ_BS'(x)
            let d = tau * (-lrn).exp() * rn.intensity_deriv(x) / bs.intensity_deriv(x);
            values.push(g);
            slopes.push(if d.is_finite() { d } else { 0.0 });
        }
        Ok(RelayTable {
            values,
            slopes,
            empty: false,
        })
    }

    /// `G(τ)`.
    pub fn eval(&self, tau: f64) -> f64 {
        if self.empty || tau <= 0.0 {
            return 0.0;
        }
        let u = tau.ln();
        if u <= TABLE_U_MIN {
            return self.values[0] * (u - TABLE_U_MIN).exp();
        }
        let pos = (u - TABLE_U_MIN) / TABLE_STEP;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("nonempty");
        }
        let s = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * TABLE_STEP, self.slopes[i + 1] * TABLE_STEP);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }
}

/// Composite Gauss–Legendre in `ln t` for `∫ e^{-t} g(t) dt` over `[t0, t1]`.
#[derive(Debug, Clone)]
pub(crate) struct LogRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl LogRule {
    pub(crate) fn new() -> Self {
        let (x, w) = gauss_legendre(8);
        LogRule { x, w }
    }

    /// Nodes `t` and weights (absorbing `e^{-t} t du`) covering `[t0, t1]`.
    pub(crate) fn nodes(&self, t0: f64, t1: f64, panel: f64) -> Vec<(f64, f64)> {
        let (u0, u1) = (t0.ln(), t1.ln());
        let panels = ((u1 - u0) / panel).ceil().max(1.0) as usize;
        let h = (u1 - u0) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.x.len());
        for p in 0..panels {
            let lo = u0 + h * p as f64;
            for (xi, wi) in self.x.iter().zip(&self.w) {
                let t = (lo + 0.5 * h * (xi + 1.0)).exp();
                out.push((t, 0.5 * h * wi * t * (-t).exp()));
            }
        }
        out
    }
}
