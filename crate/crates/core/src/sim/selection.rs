use serde::{Deserialize, Serialize};

use super::deployment::{distance, Deployment};
use crate::model::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    OneHop,
    TwoHop,
    None,
}

/// Outcome of the BS/RN selection protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSelection {
    pub association: Association,
    /// Serving BS: `BS_0` for one hop, `BS_R0` for two hops.
    pub bs: Option<usize>,
    pub rn: Option<usize>,
    /// Candidate `BS_0` and its biased received power.
    pub bs0: Option<usize>,
    pub p_bs0: f64,
    /// `min` of the two hop powers of the best relay, `0` if none qualifies.
    pub p_rn0: f64,
    /// Whether candidates were restricted to BSs caching the file.
    pub from_cache: bool,
}

fn biased_power(p_bar: f64, d: f64, los: bool, cfg: &NetworkConfig) -> f64 {
    p_bar * d.powf(-cfg.alpha(los))
}

/// Selection among the BSs accepted by `candidate`, using fading-free biased
/// received power with the realised blockage states.
pub fn select_over<C>(dep: &Deployment, cfg: &NetworkConfig, candidate: C) -> NodeSelection
where
    C: Fn(usize) -> bool,
{
    let (pb, pr) = (cfg.p_bar_bs(), cfg.p_bar_rn());
    let mut out = NodeSelection {
        association: Association::None,
        bs: None,
        rn: None,
        bs0: None,
        p_bs0: 0.0,
        p_rn0: 0.0,
        from_cache: false,
    };
    for (i, &b) in dep.bs_positions.iter().enumerate() {
        if !candidate(i) {
            continue;
        }
        let p = biased_power(pb, distance(dep.ue_position, b), dep.ue_bs_los[i], cfg);
        if p > out.p_bs0 {
            out.p_bs0 = p;
            out.bs0 = Some(i);
        }
    }
    let Some(bs0) = out.bs0 else {
        return out;
    };
    let mut relay = None;
    for (j, &r) in dep.rn_positions.iter().enumerate() {
        let p_ru = biased_power(pr, distance(dep.ue_position, r), dep.ue_rn_los[j], cfg);
        if p_ru <= out.p_bs0 {
            continue;
        }
        let mut best_br = (0.0, None);
        for (i, &b) in dep.bs_positions.iter().enumerate() {
            if !candidate(i) {
                continue;
            }
            let p = biased_power(pb, distance(r, b), dep.rn_bs_los[j][i], cfg);
            if p > best_br.0 {
                best_br = (p, Some(i));
            }
        }
        let v = p_ru.min(best_br.0);
        if v > out.p_rn0 {
            out.p_rn0 = v;
            relay = Some((j, best_br.1));
        }
    }
    match relay {
        Some((j, bsr)) if out.p_rn0 > out.p_bs0 => {
            out.association = Association::TwoHop;
            out.rn = Some(j);
            out.bs = bsr;
        }
        _ => {
            out.association = Association::OneHop;
            out.bs = Some(bs0);
        }
    }
    out
}

/// Cache-aware selection for `file`; falls back to all BSs when no BS caches it.
pub fn select_nodes(dep: &Deployment, file: usize, cfg: &NetworkConfig) -> NodeSelection {
    let cached = select_over(dep, cfg, |i| dep.caches_file(i, file));
    if cached.bs0.is_some() {
        NodeSelection {
            from_cache: true,
            ..cached
        }
    } else {
        select_over(dep, cfg, |_| true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Deployment, NetworkConfig) {
        let cfg = NetworkConfig::reference();
        let ue = [400.0, 400.0];
        let dep = Deployment {
            bs_positions: vec![[500.0, 400.0], [400.0, 910.0]],
            rn_positions: vec![[410.0, 400.0]],
            ue_position: ue,
            cache_contents: vec![vec![0], vec![0]],
            rng_seed: 0,
            ue_bs_los: vec![true, false],
            ue_rn_los: vec![true],
            rn_bs_los: vec![vec![false, false]],
            rn_rn_los: vec![vec![true]],
        };
        (dep, cfg)
    }

    #[test]
    fn weak_backhaul_keeps_one_hop() {
        let (dep, cfg) = fixture();
        let s = select_nodes(&dep, 0, &cfg);
        assert_eq!(s.association, Association::OneHop);
        assert_eq!(s.bs, Some(0));
        assert!(s.from_cache);
    }

    #[test]
    fn uncached_file_falls_back_to_power() {
        let (dep, cfg) = fixture();
        let s = select_nodes(&dep, 3, &cfg);
        assert!(!s.from_cache);
        assert_eq!(s.bs0, Some(0));
    }
}
