use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deployment::{distance, fill_caches, Deployment};
use super::selection::{select_nodes, select_over, Association, NodeSelection};
use crate::error::{Error, Result};
use crate::model::{CachingPolicy, ContentCatalog, GainPattern, NetworkConfig};

/// Attempts at drawing a deployment with at least one BS.
const MAX_RESAMPLES: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub deployment: u64,
    pub requested_file: usize,
    /// Final association after the protocol, including the power-only
    /// reselection on cache miss or rate failure.
    pub association: Association,
    /// Association over all BSs by biased received power alone.
    pub baseline_association: Association,
    pub offload_success: bool,
    /// SINR of each hop of the cache-aware attempt (empty on cache miss).
    pub sinrs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationHistogram {
    pub one_hop: u64,
    pub two_hop: u64,
    pub none: u64,
}

impl AssociationHistogram {
    fn add(&mut self, a: Association) {
        match a {
            Association::OneHop => self.one_hop += 1,
            Association::TwoHop => self.two_hop += 1,
            Association::None => self.none += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.one_hop + self.two_hop + self.none
    }

    pub fn two_hop_fraction(&self) -> f64 {
        self.two_hop as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub sbop: f64,
    pub std_error: f64,
    pub deployments: usize,
    pub histogram: AssociationHistogram,
    pub baseline_histogram: AssociationHistogram,
    /// `(requests, successes)` per file.
    pub per_file: Vec<(u64, u64)>,
}

struct Fading {
    los: Gamma<f64>,
    nlos: Gamma<f64>,
}

impl Fading {
    fn new(cfg: &NetworkConfig) -> Result<Self> {
        let make = |n: u32| {
            Gamma::new(n as f64, 1.0 / n as f64).map_err(|e| Error::InvalidArgument(format!("fading shape {n}: {e}")))
        };
        Ok(Fading {
            los: make(cfg.n_los)?,
            nlos: make(cfg.n_nlos)?,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R, los: bool) -> f64 {
        if los {
            self.los.sample(rng)
        } else {
            self.nlos.sample(rng)
        }
    }
}

fn draw_gain<R: Rng>(rng: &mut R, pattern: &GainPattern) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for g in &pattern.outcomes {
        acc += g.prob;
        if u < acc {
            return g.gain;
        }
    }
    pattern.outcomes[2].gain
}

#[derive(Clone, Copy, PartialEq)]
enum Node {
    Bs(usize),
    Rn(usize),
}

struct Channel<'a> {
    dep: &'a Deployment,
    cfg: &'a NetworkConfig,
    fading: &'a Fading,
    gains: GainPattern,
}

impl Channel<'_> {
    fn position(&self, n: Node) -> [f64; 2] {
        match n {
            Node::Bs(i) => self.dep.bs_positions[i],
            Node::Rn(j) => self.dep.rn_positions[j],
        }
    }

    fn power(&self, n: Node) -> f64 {
        match n {
            Node::Bs(_) => self.cfg.p_bs,
            Node::Rn(_) => self.cfg.p_rn,
        }
    }

    // link state between transmitter `tx` and receiver `rx` (None = the UE)
    fn los(&self, tx: Node, rx: Option<usize>) -> bool {
        match (tx, rx) {
            (Node::Bs(i), None) => self.dep.ue_bs_los[i],
            (Node::Rn(j), None) => self.dep.ue_rn_los[j],
            (Node::Bs(i), Some(r)) => self.dep.rn_bs_los[r][i],
            (Node::Rn(j), Some(r)) => self.dep.rn_rn_los[r][j],
        }
    }

    fn received<R: Rng>(&self, rng: &mut R, tx: Node, rx: Option<usize>, gain: f64) -> f64 {
        let at = match rx {
            None => self.dep.ue_position,
            Some(r) => self.dep.rn_positions[r],
        };
        let los = self.los(tx, rx);
        let d = distance(self.position(tx), at);
        self.power(tx) * self.fading.draw(rng, los) * gain * self.cfg.gamma_intercept * d.powf(-self.cfg.alpha(los))
    }

    /// SINR at `rx` from `serving`, every other node transmitting.
    fn sinr<R: Rng>(&self, rng: &mut R, serving: Node, rx: Option<usize>) -> f64 {
        let main = self.cfg.gain_main * self.cfg.gain_main;
        let signal = self.received(rng, serving, rx, main);
        let mut interference = 0.0;
        let others = (0..self.dep.bs_positions.len())
            .map(Node::Bs)
            .chain((0..self.dep.rn_positions.len()).map(Node::Rn))
            .filter(|&n| n != serving && Some(n) != rx.map(Node::Rn));
        for n in others {
            let g = draw_gain(rng, &self.gains);
            interference += self.received(rng, n, rx, g);
        }
        signal / (interference + self.cfg.noise_power)
    }
}

fn hop_sinrs<R: Rng>(ch: &Channel, rng: &mut R, sel: &NodeSelection) -> Vec<f64> {
    match (sel.association, sel.bs, sel.rn) {
        (Association::OneHop, Some(b), _) => vec![ch.sinr(rng, Node::Bs(b), None)],
        (Association::TwoHop, Some(b), Some(r)) => {
            vec![ch.sinr(rng, Node::Bs(b), Some(r)), ch.sinr(rng, Node::Rn(r), None)]
        }
        _ => Vec::new(),
    }
}

/// Result of serving one request in a fixed deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct ServedRequest {
    /// Selection that actually serves the UE: the cache-aware one when the
    /// offload succeeds, else the power-only reselection.
    pub selection: NodeSelection,
    pub baseline: NodeSelection,
    pub offload_success: bool,
    pub sinrs: Vec<f64>,
}

/// Runs the selection protocol for `file` and checks every hop's SINR against `nu`.
pub fn serve_request<R: Rng>(
    dep: &Deployment,
    file: usize,
    nu: f64,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<ServedRequest> {
    let fading = Fading::new(cfg)?;
    Ok(serve_with(dep, file, nu, cfg, &fading, rng))
}

fn serve_with<R: Rng>(
    dep: &Deployment,
    file: usize,
    nu: f64,
    cfg: &NetworkConfig,
    fading: &Fading,
    rng: &mut R,
) -> ServedRequest {
    let ch = Channel {
        dep,
        cfg,
        fading,
        gains: cfg.gain_pattern(),
    };
    let baseline = select_over(dep, cfg, |_| true);
    let sel = select_nodes(dep, file, cfg);
    let (sinrs, offload_success) = if sel.from_cache {
        let s = hop_sinrs(&ch, rng, &sel);
        let ok = !s.is_empty() && s.iter().all(|&v| v > nu);
        (s, ok)
    } else {
        (Vec::new(), false)
    };
    ServedRequest {
        selection: if offload_success { sel } else { baseline },
        baseline,
        offload_success,
        sinrs,
    }
}

fn one_trial(
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
    policy: &CachingPolicy,
    requests: &WeightedIndex<f64>,
    fading: &Fading,
    seed: u64,
    index: u64,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut dep = None;
    for _ in 0..MAX_RESAMPLES {
        let d = Deployment::sample(cfg, &mut rng, seed)?;
        if !d.bs_positions.is_empty() {
            dep = Some(d);
            break;
        }
    }
    let mut dep = dep.ok_or_else(|| Error::InvalidState("deployment never contained a BS".into()))?;
    fill_caches(&mut dep, policy, &mut rng);
    let file = requests.sample(&mut rng);
    let served = serve_with(&dep, file, catalog.sinr_thresholds[file], cfg, fading, &mut rng);
    Ok(TrialOutcome {
        deployment: index,
        requested_file: file,
        association: served.selection.association,
        baseline_association: served.baseline.association,
        offload_success: served.offload_success,
        sinrs: served.sinrs,
    })
}

fn check_inputs(catalog: &ContentCatalog, policy: &CachingPolicy, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("n_deployments", "must be at least 1"));
    }
    if policy.len() != catalog.f_count {
        return Err(Error::InvalidPolicy(format!(
            "policy has {} entries for {} files",
            policy.len(),
            catalog.f_count
        )));
    }
    policy.validate(catalog.cache_size)
}

/// Per-trial records for deployments `0..n_deployments`.
pub fn run_trials_recorded(
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
    policy: &CachingPolicy,
    n_deployments: usize,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    check_inputs(catalog, policy, n_deployments)?;
    let requests = WeightedIndex::new(&catalog.popularity)
        .map_err(|e| Error::InvalidArgument(format!("popularity: {e}")))?;
    let fading = Fading::new(cfg)?;
    (0..n_deployments as u64)
        .into_par_iter()
        .map(|i| one_trial(cfg, catalog, policy, &requests, &fading, seed, i))
        .collect()
}

/// Monte Carlo SBOP with its standard error.
pub fn run_trials(
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
    policy: &CachingPolicy,
    n_deployments: usize,
    seed: u64,
) -> Result<McEstimate> {
    let trials = run_trials_recorded(cfg, catalog, policy, n_deployments, seed)?;
    let mut histogram = AssociationHistogram::default();
    let mut baseline_histogram = AssociationHistogram::default();
    let mut per_file = vec![(0u64, 0u64); catalog.f_count];
    let mut successes = 0u64;
    for t in &trials {
        histogram.add(t.association);
        baseline_histogram.add(t.baseline_association);
        per_file[t.requested_file].0 += 1;
        if t.offload_success {
            per_file[t.requested_file].1 += 1;
            successes += 1;
        }
    }
    let n = trials.len() as f64;
    let sbop = successes as f64 / n;
    let std_error = if trials.len() > 1 {
        (sbop * (1.0 - sbop) / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        sbop,
        std_error,
        deployments: trials.len(),
        histogram,
        baseline_histogram,
        per_file,
    })
}
