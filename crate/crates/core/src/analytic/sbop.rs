//! Quadrature-based SBOP under interference.

use serde::{Deserialize, Serialize};

use super::association::{two_hop_probability, LogRule, RelayTable, T_MAX};
use super::interference::{InterferenceKernel, Scenario};
use super::tier::TierSpec;
use crate::error::{Error, Result};
use crate::model::{CachingPolicy, ContentCatalog, NetworkConfig};
use rayon::prelude::*;

use crate::numeric::{gauss_laguerre, Chebyshev, QuadratureRule};

/// Total SBOP with its per-file conditional components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbopBreakdown {
    pub total: f64,
    /// `(P_s^(1hop), P_s^(2hop))` per file.
    pub per_file: Vec<(f64, f64)>,
    pub p_one_hop: f64,
    pub p_two_hop: f64,
}

/// Lower end of the intensity-variable grid used for the normalisers.
const T_MIN: f64 = 1e-12;
/// Smallest decay level searched for.
const DECAY_LO: f64 = 1e-8;
/// Laguerre level placed at the decay point of the success probability.
const DECAY_NODE: f64 = 2.0;

// Laguerre rate for a success curve decaying at intensity level `decay`.
fn rate_for(decay: f64) -> f64 {
    (DECAY_NODE / decay).max(1.0)
}

/// Reusable evaluator for one network configuration and quadrature order.
///
/// Integrals run over the serving tier's intensity level `t`. The Laguerre
/// rule is applied to `y = a t`, with the rate `a ≥ 1` chosen per file from
/// the level at which the hop success probability decays, so steep success
/// curves still see enough nodes.
#[derive(Debug, Clone)]
pub struct SbopEvaluator {
    cfg: NetworkConfig,
    rule: QuadratureRule,
    kernel: InterferenceKernel,
    table: RelayTable,
    log_rule: LogRule,
    bs: TierSpec,
    rn: TierSpec,
    p_two_hop: f64,
    /// `(t, weight)` covering `[T_MIN, T_MAX]` in the BS intensity variable.
    grid: Vec<(f64, f64)>,
    /// `(weight, Λ_BS(x_RN(t)))` on the same grid for the relay tier.
    ru_grid: Vec<(f64, f64)>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `η = N (N!)^{-1/N}`.
pub(crate) fn alzer_eta(n: u32) -> f64 {
    let fact: f64 = (1..=n).map(f64::from).product();
    n as f64 * fact.powf(-1.0 / n as f64)
}

impl SbopEvaluator {
    pub fn new(cfg: &NetworkConfig, quadrature_order: usize) -> Result<Self> {
        Self::with_rule(cfg, gauss_laguerre(quadrature_order)?)
    }

    pub fn with_rule(cfg: &NetworkConfig, rule: QuadratureRule) -> Result<Self> {
        cfg.validate()?;
        let bs = TierSpec::bs(cfg, 1.0);
        let rn = TierSpec::rn(cfg);
        let log_rule = LogRule::new();
        let grid = log_rule.nodes(T_MIN, T_MAX, 0.5);
        let ru_grid = if rn.density > 0.0 {
            grid.iter()
                .map(|&(t, w)| Ok((w, bs.intensity(rn.inverse_intensity(t)?))))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(SbopEvaluator {
            kernel: InterferenceKernel::new(cfg),
            table: RelayTable::new(cfg)?,
            p_two_hop: two_hop_probability(cfg)?,
            cfg: cfg.clone(),
            rule,
            log_rule,
            bs,
            rn,
            grid,
            ru_grid,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order
    }

    pub fn p_two_hop(&self) -> f64 {
        self.p_two_hop
    }

    /// Success probability of a hop at serving inverse power `x`, multiplied by `e^{shift}`.
    #[allow(clippy::too_many_arguments)]
    fn hop_success(
        &self,
        x: f64,
        bias: f64,
        los_share: f64,
        nu: f64,
        shift: f64,
        scenario: Scenario,
        p: f64,
    ) -> f64 {
        let tiers = InterferenceKernel::scenario_tiers(&self.cfg, scenario, p, x);
        let sigma2 = self.cfg.noise_power;
        let mut total = 0.0;
        for (los, share) in [(true, los_share), (false, 1.0 - los_share)] {
            if share <= 0.0 {
                continue;
            }
            let n = self.cfg.nakagami(los);
            let eta = alzer_eta(n);
            let mut sum = 0.0;
            for u in 1..=n {
                let s = u as f64 * eta * nu * x * bias;
                let exponent = shift - s * sigma2;
                if exponent < -36.0 {
                    continue;
                }
                let sign = if u % 2 == 1 { 1.0 } else { -1.0 };
                sum += sign * binomial(n, u) * exponent.exp() * self.kernel.laplace(s, &tiers);
            }
            total += share * sum;
        }
        total.clamp(0.0, shift.exp())
    }

    /// Level of `tier` at which the hop success first drops below `1/e`.
    fn decay_level(&self, tier: &TierSpec, bias: f64, nu: f64, scenario: Scenario) -> Result<f64> {
        let target = (-1.0f64).exp();
        let success = |level: f64| -> Result<f64> {
            let x = tier.inverse_intensity(level)?;
            Ok(self.hop_success(x, bias, tier.los_share(x), nu, 0.0, scenario, 1.0))
        };
        let (mut lo, mut hi) = (DECAY_LO.ln(), T_MAX.ln());
        if success(hi.exp())? >= target {
            return Ok(T_MAX);
        }
        if success(lo.exp())? < target {
            return Ok(DECAY_LO);
        }
        // the rate only needs the decay level to within a few percent
        for _ in 0..10 {
            let mid = 0.5 * (lo + hi);
            if success(mid.exp())? >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// Precomputes the caching-independent relay-to-UE hop for threshold `nu`.
    pub fn file(&self, nu: f64) -> Result<FileModel<'_>> {
        if !(nu > 0.0) || nu.is_nan() {
            return Err(Error::InvalidArgument(format!("SINR threshold must be positive, got {nu}")));
        }
        let bs_decay = self.decay_level(&self.bs, self.cfg.b_bs, nu, Scenario::Bu)?;
        let mut ru_nodes = Vec::new();
        if self.rn.density > 0.0 {
            let rate = rate_for(self.decay_level(&self.rn, self.cfg.b_rn, nu, Scenario::Ru)?);
            for (&y, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let t = y / rate;
                let z = self.rn.inverse_intensity(t)?;
                let shift = y - t;
                let h = self.hop_success(z, self.cfg.b_rn, self.rn.los_share(z), nu, shift, Scenario::Ru, 1.0);
                ru_nodes.push((w * h / rate, self.bs.intensity(z)));
            }
        }
        Ok(FileModel {
            eval: self,
            nu,
            bs_decay,
            ru_nodes,
        })
    }

    /// SBOP for `policy` over `catalog`.
    pub fn total(&self, policy: &CachingPolicy, catalog: &ContentCatalog) -> Result<SbopBreakdown> {
        if policy.len() != catalog.f_count {
            return Err(Error::InvalidPolicy(format!(
                "policy has {} entries for {} files",
                policy.len(),
                catalog.f_count
            )));
        }
        policy.validate(catalog.cache_size)?;
        let p2 = self.p_two_hop;
        let p1 = 1.0 - p2;
        let mut per_file = Vec::with_capacity(catalog.f_count);
        let mut total = 0.0;
        for (n, &p) in policy.probs.iter().enumerate() {
            let (one, two) = if p > 0.0 {
                self.file(catalog.sinr_thresholds[n])?.conditional(p)?
            } else {
                (0.0, 0.0)
            };
            total += catalog.popularity[n] * (p1 * one + p2 * two);
            per_file.push((one, two));
        }
        Ok(SbopBreakdown {
            total: total.clamp(0.0, 1.0),
            per_file,
            p_one_hop: p1,
            p_two_hop: p2,
        })
    }

    // ∫ e^{-t} (1 − e^{-t}) G(t/p) dt
    fn relay_normalizer(&self, p: f64) -> f64 {
        self.grid
            .iter()
            .map(|&(t, w)| w * -(-t).exp_m1() * self.table.eval(t / p))
            .sum()
    }

    // ∫ e^{-t} χ_RU dt in the relay tier's intensity variable
    fn ru_normalizer(&self, p: f64) -> f64 {
        0.5 * T_MIN
            + self
                .ru_grid
                .iter()
                .map(|&(w, level)| w * chi_ru(p, level))
                .sum::<f64>()
    }
}

fn chi_ru(p: f64, bs_level: f64) -> f64 {
    let f = -(-p * bs_level).exp_m1();
    0.5 * (1.0 - f * f)
}

/// Per-file view of an [`SbopEvaluator`].
#[derive(Debug, Clone)]
pub struct FileModel<'a> {
    eval: &'a SbopEvaluator,
    nu: f64,
    /// Full-BS-tier level at which the BS hop success decays.
    bs_decay: f64,
    /// `(w e^{y - t} h_RU(z) / a, Λ_BS(z))` per Laguerre node.
    ru_nodes: Vec<(f64, f64)>,
}

impl FileModel<'_> {
    pub fn threshold(&self) -> f64 {
        self.nu
    }

    /// `(P_s^(1hop)(p), P_s^(2hop)(p))` for caching probability `p`.
    pub fn conditional(&self, p: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("caching probability {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ev = self.eval;
        let rule = &ev.rule;
        let relays = !ev.table.is_empty();
        let n_br = if relays { ev.relay_normalizer(p) } else { 0.0 };
        let n_bu = 1.0 - n_br;
        let (mut bu, mut br) = (0.0, 0.0);
        let rate = rate_for(p * self.bs_decay);
        for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = y / rate;
            let level = t / p;
            let x = ev.bs.inverse_intensity(level)?;
            // identical interferer composition on the BU and BR hops
            let h = ev.hop_success(x, ev.cfg.b_bs, ev.bs.los_share(x), self.nu, y - t, Scenario::Bu, p);
            let weight = w * h / rate;
            if weight == 0.0 {
                continue;
            }
            let g = ev.table.eval(level);
            bu += weight * (1.0 - g * -(-t).exp_m1());
            if relays {
                let chi_br: f64 = ev
                    .log_rule
                    .nodes(t, t + T_MAX, 0.5)
                    .iter()
                    .map(|&(tt, ww)| ww * ev.table.eval(tt / p))
                    .sum();
                br += weight * chi_br;
            }
        }
        let one = if n_bu > 0.0 { bu / n_bu } else { 0.0 };
        let two = if relays && n_br > 0.0 {
            let n_ru = ev.ru_normalizer(p);
            let ru: f64 = self.ru_nodes.iter().map(|&(c, level)| c * chi_ru(p, level)).sum();
            (br / n_br) * (ru / n_ru)
        } else {
            0.0
        };
        Ok((one.clamp(0.0, 1.0), two.clamp(0.0, 1.0)))
    }

    /// `p_(1hop) P_s^(1hop)(p) + p_(2hop) P_s^(2hop)(p)`.
    pub fn objective(&self, p: f64) -> Result<f64> {
        let (one, two) = self.conditional(p)?;
        let p2 = self.eval.p_two_hop;
        Ok((1.0 - p2) * one + p2 * two)
    }
}

/// Separable interpolant `Σ a_n φ_n(p_n)` of the SBOP, one Chebyshev
/// series per file over `p_n ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct SbopSurrogate {
    popularity: Vec<f64>,
    terms: Vec<Chebyshev>,
}

impl SbopSurrogate {
    /// Samples every file's objective at `nodes` Chebyshev points.
    pub fn build(ev: &SbopEvaluator, catalog: &ContentCatalog, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument(format!("surrogate needs at least 2 nodes, got {nodes}")));
        }
        let terms = catalog
            .sinr_thresholds
            .par_iter()
            .map(|&nu| {
                let file = ev.file(nu)?;
                let samples = Chebyshev::nodes(0.0, 1.0, nodes)
                    .into_iter()
                    .map(|p| file.objective(p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Chebyshev::from_samples(0.0, 1.0, &samples))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SbopSurrogate {
            popularity: catalog.popularity.clone(),
            terms,
        })
    }

    /// `φ_n(p)`.
    pub fn file_term(&self, n: usize, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            self.terms[n].eval(p.min(1.0)).clamp(0.0, 1.0)
        }
    }

    pub fn eval(&self, probs: &[f64]) -> f64 {
        probs
            .iter()
            .enumerate()
            .map(|(n, &p)| self.popularity[n] * self.file_term(n, p))
            .sum()
    }
}

/// Conditional SBOP of a file served over a one-hop link.
pub fn sbop_one_hop(p_n: f64, nu_n: f64, cfg: &NetworkConfig, rule: &QuadratureRule) -> Result<f64> {
    let ev = SbopEvaluator::with_rule(cfg, rule.clone())?;
    Ok(ev.file(nu_n)?.conditional(p_n)?.0)
}

/// Conditional SBOP of a file served over a two-hop link.
pub fn sbop_two_hop(p_n: f64, nu_n: f64, cfg: &NetworkConfig, rule: &QuadratureRule) -> Result<f64> {
    let ev = SbopEvaluator::with_rule(cfg, rule.clone())?;
    Ok(ev.file(nu_n)?.conditional(p_n)?.1)
}

/// SBOP of `policy` with its per-file breakdown.
pub fn total_sbop(
    policy: &CachingPolicy,
    catalog: &ContentCatalog,
    cfg: &NetworkConfig,
    rule: &QuadratureRule,
) -> Result<SbopBreakdown> {
    SbopEvaluator::with_rule(cfg, rule.clone())?.total(policy, catalog)
}
