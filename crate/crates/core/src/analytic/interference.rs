//! Laplace transform of the aggregate interference at a receiver.
//!
//! Each interfering tier contributes, per link state `i` and gain outcome `G`,
//! the factor `exp(-2π λ p_G J_i(k, R))` with
//!
//! `J_i(k, R) = ∫_R^∞ (1 − (1 + k t^{-α_i})^{-N_i}) ρ_i(t) t dt`, `k = s P G γ / N_i`.
//!
//! `J` is evaluated on a fixed grid of Gauss–Legendre panels in `ln t`. Panels
//! deep in the saturated (`c = k t^-α ≫ 1`) or linear (`c ≪ 1`) regime use
//! precomputed moment sums of the series expansions, so only the few panels
//! around the transition are summed node by node.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::{GainPattern, NetworkConfig};
use crate::numeric::legendre::gauss_legendre;

const PANEL_NODES: usize = 8;
const PANEL_WIDTH: f64 = 1.0;
const LN_T_LO: f64 = -9.210_340_371_976_182; // ln 1e-4
const LN_T_HI: f64 = 18.420_680_743_952_367; // ln 1e8
const SATURATED: f64 = 1e3;
const LINEAR: f64 = 1e-3;

/// Which hop the interference is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// BS to UE (one-hop).
    Bu,
    /// BS to RN (first hop of a two-hop link).
    Br,
    /// RN to UE (second hop).
    Ru,
}

/// An interfering PPP tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererTier {
    pub density: f64,
    pub power: f64,
    /// Serving inverse power and the tier's `P̄`; interferers are excluded
    /// inside the radius at which they would overtake the serving node.
    pub exclusion: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct Panel {
    t: [f64; PANEL_NODES],
    /// `w ρ(t) t²` (the extra `t` from `dt = t du`).
    wb: [f64; PANEL_NODES],
    /// Moments `Σ wb t^{α(N+j)}`, j = 0, 1, 2, and `Σ wb`.
    head: [f64; 4],
}

/// Precomputed quadrature for one link state.
#[derive(Debug, Clone)]
pub struct StateKernel {
    alpha: f64,
    n: i32,
    beta: f64,
    los: bool,
    panels: Vec<Panel>,
    /// Suffix sums of `Σ wb t^{-jα}` for j = 1, 2, 3, from panel index on.
    lin_suffix: Vec<[f64; 3]>,
    gl_x: [f64; PANEL_NODES],
    gl_w: [f64; PANEL_NODES],
}

fn rho(los: bool, beta: f64, t: f64) -> f64 {
    if los {
        (-beta * t).exp()
    } else {
        -(-beta * t).exp_m1()
    }
}

fn saturating(c: f64, n: i32) -> f64 {
    1.0 - (1.0 + c).powi(-n)
}

impl StateKernel {
    pub fn new(alpha: f64, n: u32, beta: f64, los: bool) -> Self {
        let (x, w) = gauss_legendre(PANEL_NODES);
        let mut gl_x = [0.0; PANEL_NODES];
        let mut gl_w = [0.0; PANEL_NODES];
        gl_x.copy_from_slice(&x);
        gl_w.copy_from_slice(&w);
        let n = n as i32;
        let count = ((LN_T_HI - LN_T_LO) / PANEL_WIDTH).round() as usize;
        let mut panels = Vec::with_capacity(count);
        for p in 0..count {
            let u0 = LN_T_LO + PANEL_WIDTH * p as f64;
            let mut panel = Panel {
                t: [0.0; PANEL_NODES],
                wb: [0.0; PANEL_NODES],
                head: [0.0; 4],
            };
            for j in 0..PANEL_NODES {
                let u = u0 + 0.5 * PANEL_WIDTH * (gl_x[j] + 1.0);
                let t = u.exp();
                let wb = 0.5 * PANEL_WIDTH * gl_w[j] * rho(los, beta, t) * t * t;
                panel.t[j] = t;
                panel.wb[j] = wb;
                panel.head[0] += wb * t.powf(alpha * n as f64);
                panel.head[1] += wb * t.powf(alpha * (n + 1) as f64);
                panel.head[2] += wb * t.powf(alpha * (n + 2) as f64);
                panel.head[3] += wb;
            }
            panels.push(panel);
        }
        let mut lin_suffix = vec![[0.0; 3]; count + 1];
        for p in (0..count).rev() {
            let mut s = lin_suffix[p + 1];
            for j in 0..PANEL_NODES {
                let (t, wb) = (panels[p].t[j], panels[p].wb[j]);
                let ta = t.powf(-alpha);
                s[0] += wb * ta;
                s[1] += wb * ta * ta;
                s[2] += wb * ta * ta * ta;
            }
            lin_suffix[p] = s;
        }
        StateKernel {
            alpha,
            n,
            beta,
            los,
            panels,
            lin_suffix,
            gl_x,
            gl_w,
        }
    }

    fn panel_start(&self, p: usize) -> f64 {
        (LN_T_LO + PANEL_WIDTH * p as f64).exp()
    }

    // node-by-node sum over ln t ∈ [u0, u1]
    fn explicit_range(&self, k: f64, u0: f64, u1: f64) -> f64 {
        let h = u1 - u0;
        let mut s = 0.0;
        for j in 0..PANEL_NODES {
            let t = (u0 + 0.5 * h * (self.gl_x[j] + 1.0)).exp();
            let c = k * t.powf(-self.alpha);
            s += self.gl_w[j] * saturating(c, self.n) * rho(self.los, self.beta, t) * t * t;
        }
        0.5 * h * s
    }

    /// `J(k, R)` for `c(t) = k t^-α`.
    pub fn j(&self, k: f64, r: f64) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        let (n, alpha) = (self.n, self.alpha);
        let nf = n as f64;
        let mut total = 0.0;
        let mut first = 0usize;
        if r > self.panel_start(0) {
            let ur = r.ln();
            let p = ((ur - LN_T_LO) / PANEL_WIDTH).floor() as usize;
            if p >= self.panels.len() {
                return self.tail(k, r.max(self.grid_end()));
            }
            let end = LN_T_LO + PANEL_WIDTH * (p + 1) as f64;
            total += self.explicit_range(k, ur, end);
            first = p + 1;
        } else {
            // below the grid the integrand is ρ t with c ≫ 1 in every realistic setting
            let t0 = self.panel_start(0);
            let base = if self.los { 0.5 * t0 * t0 } else { self.beta * t0 * t0 * t0 / 3.0 };
            total += base * saturating(k * t0.powf(-alpha), n);
        }
        let inv_k = 1.0 / k;
        let kn = inv_k.powi(n);
        let mut p = first;
        while p < self.panels.len() {
            let t_end = self.panel_start(p + 1);
            let c_min = k * t_end.powf(-alpha);
            if c_min <= SATURATED {
                break;
            }
            let h = &self.panels[p].head;
            // (1+c)^{-N} ≈ c^{-N} (1 − N/c + N(N+1)/2 c^{-2})
            total += h[3]
                - kn * (h[0] - nf * inv_k * h[1] + 0.5 * nf * (nf + 1.0) * inv_k * inv_k * h[2]);
            p += 1;
        }
        while p < self.panels.len() {
            let c_max = k * self.panel_start(p).powf(-alpha);
            if c_max < LINEAR {
                break;
            }
            let panel = &self.panels[p];
            for j in 0..PANEL_NODES {
                let c = k * panel.t[j].powf(-alpha);
                total += panel.wb[j] * saturating(c, n);
            }
            p += 1;
        }
        if p < self.panels.len() {
            let s = &self.lin_suffix[p];
            total += nf * k * s[0] - 0.5 * nf * (nf + 1.0) * k * k * s[1]
                + nf * (nf + 1.0) * (nf + 2.0) / 6.0 * k * k * k * s[2];
        }
        total + self.tail(k, self.grid_end())
    }

    fn grid_end(&self) -> f64 {
        self.panel_start(self.panels.len())
    }

    // series contribution beyond `t_hi`, with ρ frozen at its value there
    fn tail(&self, k: f64, t_hi: f64) -> f64 {
        let rho_hi = rho(self.los, self.beta, t_hi);
        if rho_hi == 0.0 {
            return 0.0;
        }
        if self.alpha <= 2.0 {
            return f64::INFINITY;
        }
        let nf = self.n as f64;
        let mut coeff = 1.0;
        let mut sum = 0.0;
        for j in 1..=3 {
            let jf = j as f64;
            coeff *= -(nf + jf - 1.0) / jf * k;
            sum -= coeff * t_hi.powf(2.0 - jf * self.alpha) / (jf * self.alpha - 2.0);
        }
        sum * rho_hi
    }
}

/// Laplace transform evaluator for a network configuration.
#[derive(Debug, Clone)]
pub struct InterferenceKernel {
    los: StateKernel,
    nlos: StateKernel,
    gains: GainPattern,
    gamma: f64,
}

impl InterferenceKernel {
    pub fn new(cfg: &NetworkConfig) -> Self {
        InterferenceKernel {
            los: StateKernel::new(cfg.alpha_los, cfg.n_los, cfg.beta, true),
            nlos: StateKernel::new(cfg.alpha_nlos, cfg.n_nlos, cfg.beta, false),
            gains: cfg.gain_pattern(),
            gamma: cfg.gamma_intercept,
        }
    }

    /// `E[exp(-s I)]` for the aggregate interference of `tiers`.
    pub fn laplace(&self, s: f64, tiers: &[InterfererTier]) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let mut exponent = 0.0;
        for tier in tiers.iter().filter(|t| t.density > 0.0) {
            for kernel in [&self.los, &self.nlos] {
                let r = match tier.exclusion {
                    Some((x, p_bar)) => (x * p_bar).powf(1.0 / kernel.alpha),
                    None => 0.0,
                };
                for g in &self.gains.outcomes {
                    if g.prob == 0.0 {
                        continue;
                    }
                    let k = s * tier.power * g.gain * self.gamma / kernel.n as f64;
                    exponent += tier.density * g.prob * kernel.j(k, r);
                }
            }
        }
        (-2.0 * PI * exponent).exp()
    }

    /// Interfering tiers for a hop with serving inverse power `x` and file caching probability `p`.
    pub fn scenario_tiers(
        cfg: &NetworkConfig,
        scenario: Scenario,
        p: f64,
        x: f64,
    ) -> Vec<InterfererTier> {
        let caching = InterfererTier {
            density: p * cfg.lambda_bs,
            power: cfg.p_bs,
            exclusion: Some((x, cfg.p_bar_bs())),
        };
        let non_caching = InterfererTier {
            density: (1.0 - p) * cfg.lambda_bs,
            power: cfg.p_bs,
            exclusion: None,
        };
        match scenario {
            Scenario::Bu | Scenario::Br => vec![
                caching,
                non_caching,
                InterfererTier {
                    density: cfg.lambda_rn,
                    power: cfg.p_rn,
                    exclusion: None,
                },
            ],
            Scenario::Ru => vec![
                InterfererTier {
                    density: cfg.lambda_bs,
                    power: cfg.p_bs,
                    exclusion: None,
                },
                InterfererTier {
                    density: cfg.lambda_rn,
                    power: cfg.p_rn,
                    exclusion: Some((x, cfg.p_bar_rn())),
                },
            ],
        }
    }
}

/// Laplace transform of the interference seen on a hop.
///
/// `x` is the serving link's inverse biased received power and `s` the
/// transform argument (1/W).
pub fn laplace_interference(
    scenario: Scenario,
    p_n: f64,
    s: f64,
    x: f64,
    cfg: &NetworkConfig,
) -> f64 {
    let kernel = InterferenceKernel::new(cfg);
    kernel.laplace(s, &InterferenceKernel::scenario_tiers(cfg, scenario, p_n, x))
}
