use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CachingPolicy, ContentCatalog, NetworkConfig};

/// One network realisation around a typical UE, with every link's blockage
/// state drawn once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub bs_positions: Vec<[f64; 2]>,
    pub rn_positions: Vec<[f64; 2]>,
    pub ue_position: [f64; 2],
    /// File indices held by each BS.
    pub cache_contents: Vec<Vec<usize>>,
    pub rng_seed: u64,
    pub ue_bs_los: Vec<bool>,
    pub ue_rn_los: Vec<bool>,
    /// `rn_bs_los[j][i]`: link between RN `j` and BS `i`.
    pub rn_bs_los: Vec<Vec<bool>>,
    /// Symmetric RN-to-RN link states.
    pub rn_rn_los: Vec<Vec<bool>>,
}

pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn draw_los<R: Rng>(rng: &mut R, d: f64, beta: f64) -> bool {
    rng.random::<f64>() < (-beta * d).exp()
}

fn sample_points<R: Rng>(rng: &mut R, density: f64, side: f64) -> Vec<[f64; 2]> {
    let mean = density * side * side;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0);
    (0..count)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect()
}

impl Deployment {
    /// Draws node positions and link states from `rng`.
    pub fn sample<R: Rng>(cfg: &NetworkConfig, rng: &mut R, rng_seed: u64) -> Result<Self> {
        if !(cfg.area_side > 0.0) {
            return Err(Error::validation("area_side", "must be positive"));
        }
        let side = cfg.area_side;
        let bs_positions = sample_points(rng, cfg.lambda_bs, side);
        let rn_positions = sample_points(rng, cfg.lambda_rn, side);
        let ue_position = [0.5 * side, 0.5 * side];
        let mut dep = Deployment {
            cache_contents: vec![Vec::new(); bs_positions.len()],
            ue_bs_los: Vec::new(),
            ue_rn_los: Vec::new(),
            rn_bs_los: Vec::new(),
            rn_rn_los: vec![vec![true; rn_positions.len()]; rn_positions.len()],
            bs_positions,
            rn_positions,
            ue_position,
            rng_seed,
        };
        dep.rn_bs_los = dep
            .rn_positions
            .iter()
            .map(|&r| {
                dep.bs_positions
                    .iter()
                    .map(|&b| draw_los(rng, distance(r, b), cfg.beta))
                    .collect()
            })
            .collect();
        let n = dep.rn_positions.len();
        for j in 0..n {
            for k in j + 1..n {
                let los = draw_los(rng, distance(dep.rn_positions[j], dep.rn_positions[k]), cfg.beta);
                dep.rn_rn_los[j][k] = los;
                dep.rn_rn_los[k][j] = los;
            }
        }
        dep.redraw_ue_links(cfg, rng);
        Ok(dep)
    }

    /// Moves the UE to `position` and draws its link states afresh.
    pub fn with_ue<R: Rng>(&self, position: [f64; 2], cfg: &NetworkConfig, rng: &mut R) -> Self {
        let mut dep = self.clone();
        dep.ue_position = position;
        dep.redraw_ue_links(cfg, rng);
        dep
    }

    fn redraw_ue_links<R: Rng>(&mut self, cfg: &NetworkConfig, rng: &mut R) {
        let ue = self.ue_position;
        self.ue_bs_los = self
            .bs_positions
            .iter()
            .map(|&b| draw_los(rng, distance(ue, b), cfg.beta))
            .collect();
        self.ue_rn_los = self
            .rn_positions
            .iter()
            .map(|&r| draw_los(rng, distance(ue, r), cfg.beta))
            .collect();
    }

    pub fn caches_file(&self, bs: usize, file: usize) -> bool {
        self.cache_contents[bs].contains(&file)
    }
}

/// Deployment drawn from its own seed; caches are left empty.
pub fn sample_deployment(cfg: &NetworkConfig, seed: u64) -> Result<Deployment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Deployment::sample(cfg, &mut rng, seed)
}

/// Interval-partition rounding of `probs` into one cache: segments of length
/// `p_n` laid end to end, files hit by `u + k` for integer `k` are kept.
pub(crate) fn round_cache(probs: &[f64], u: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut start = 0.0;
    let mut next = u;
    for (n, &p) in probs.iter().enumerate() {
        let end = start + p;
        if p > 0.0 && next >= start && next < end {
            out.push(n);
            next += 1.0;
        }
        start = end;
    }
    out
}

/// Fills every cache of `dep` from `rng`.
pub fn fill_caches<R: Rng>(dep: &mut Deployment, policy: &CachingPolicy, rng: &mut R) {
    for cache in dep.cache_contents.iter_mut() {
        *cache = round_cache(&policy.probs, rng.random::<f64>());
    }
}

/// Independent probabilistic caches for every BS of `dep`.
pub fn place_caches(
    dep: &Deployment,
    policy: &CachingPolicy,
    catalog: &ContentCatalog,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if policy.len() != catalog.f_count {
        return Err(Error::InvalidPolicy(format!(
            "policy has {} entries for {} files",
            policy.len(),
            catalog.f_count
        )));
    }
    policy.validate(catalog.cache_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = dep.clone();
    fill_caches(&mut out, policy, &mut rng);
    Ok(out.cache_contents)
}
