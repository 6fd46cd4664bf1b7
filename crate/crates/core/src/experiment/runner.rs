use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EvaluationMode, ExperimentSpec, PolicyKind};
use crate::analytic::{compute_kkt_coefficients, sbop_noise_limited, SbopEvaluator, SbopSurrogate};
use crate::error::{Error, Result};
use crate::model::{mpc_policy, uc_policy, CachingPolicy, ContentCatalog, NetworkConfig};
use crate::optim::{cp_co, cp_poa, PoaOptions};
use crate::sim::run_trials;

/// Chebyshev nodes per file for the interference-aware objective.
const SURROGATE_NODES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub policy: CachingPolicy,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_variable: String,
    pub sweep_value: Option<f64>,
    pub policy: PolicyKind,
    pub mode: EvaluationMode,
    pub sbop: f64,
    pub std_error: Option<f64>,
    pub wall_time_s: f64,
    pub iterations: Option<usize>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    /// Number of Monte Carlo runs performed.
    pub simulator_runs: usize,
}

/// Caching policy of `kind`. CP-POA maximises the objective of `mode`: the
/// noise-limited SBOP for `NoiseLimited`, the interference-aware SBOP otherwise.
pub fn compute_policy(
    kind: PolicyKind,
    mode: EvaluationMode,
    spec: &ExperimentSpec,
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
) -> Result<PolicyOutcome> {
    let poa_opts = PoaOptions {
        epsilon: spec.poa_epsilon,
        ..PoaOptions::default()
    };
    let (probs, iterations) = match kind {
        PolicyKind::Mpc => (mpc_policy(catalog).probs, None),
        PolicyKind::Uc => (uc_policy(catalog).probs, None),
        PolicyKind::CpCo => {
            let r = cp_co(catalog, cfg, spec.co_tolerance)?;
            (r.probs, Some(r.iterations))
        }
        PolicyKind::CpPoa if mode == EvaluationMode::NoiseLimited => {
            let coeffs = compute_kkt_coefficients(catalog, cfg)?;
            let a = &catalog.popularity;
            let r = cp_poa(|p: &[f64]| coeffs.objective(a, p), catalog.f_count, catalog.cache_size, poa_opts)?;
            (r.probs, Some(r.iterations))
        }
        PolicyKind::CpPoa => {
            let ev = SbopEvaluator::new(cfg, spec.quadrature_order)?;
            let surrogate = SbopSurrogate::build(&ev, catalog, SURROGATE_NODES)?;
            let r = cp_poa(|p: &[f64]| surrogate.eval(p), catalog.f_count, catalog.cache_size, poa_opts)?;
            (r.probs, Some(r.iterations))
        }
    };
    Ok(PolicyOutcome {
        policy: CachingPolicy::new(probs, catalog.cache_size)?,
        iterations,
    })
}

/// SBOP of `policy` under `mode`, with the standard error for Monte Carlo.
pub fn evaluate(
    mode: EvaluationMode,
    policy: &CachingPolicy,
    spec: &ExperimentSpec,
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
) -> Result<(f64, Option<f64>)> {
    match mode {
        EvaluationMode::Analytic => {
            let ev = SbopEvaluator::new(cfg, spec.quadrature_order)?;
            Ok((ev.total(policy, catalog)?.total, None))
        }
        EvaluationMode::NoiseLimited => Ok((sbop_noise_limited(policy, catalog, cfg)?, None)),
        EvaluationMode::MonteCarlo => {
            let mc = run_trials(cfg, catalog, policy, spec.n_deployments, spec.seed)?;
            Ok((mc.sbop, Some(mc.std_error)))
        }
    }
}

fn run_cell(
    spec: &ExperimentSpec,
    point: &ExperimentSpec,
    value: Option<f64>,
    kind: PolicyKind,
    mode: EvaluationMode,
) -> Result<ResultRow> {
    let start = Instant::now();
    let cfg = point.network()?;
    let catalog = point.catalog()?;
    let outcome = compute_policy(kind, mode, point, &cfg, &catalog)?;
    let (sbop, std_error) = evaluate(mode, &outcome.policy, point, &cfg, &catalog)?;
    Ok(ResultRow {
        sweep_variable: spec.sweep_variable.map_or("none".into(), |v| v.name().into()),
        sweep_value: value,
        policy: kind,
        mode,
        sbop,
        std_error,
        wall_time_s: start.elapsed().as_secs_f64(),
        iterations: outcome.iterations,
        config_hash: point.config_hash(),
    })
}

/// Evaluates every sweep value × policy × mode cell on a pool of `workers`
/// threads (all cores when `None`) and writes the CSV if `spec.output` is set.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentReport> {
    spec.validate()?;
    let points = spec.points();
    let values: Vec<Option<f64>> = match spec.sweep_variable {
        Some(_) => spec.sweep_values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut cells = Vec::new();
    for (i, value) in values.iter().enumerate() {
        for &policy in &spec.policies {
            for &mode in &spec.modes {
                cells.push((i, *value, policy, mode));
            }
        }
    }
    let sink = spec.output.as_deref().map(create_output).transpose()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidState(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, value, policy, mode)| run_cell(spec, &points[i], value, policy, mode))
            .collect::<Result<Vec<_>>>()
    })?;
    let simulator_runs = rows.iter().filter(|r| r.mode == EvaluationMode::MonteCarlo).count();
    if let Some(file) = sink {
        write_rows(&rows, file)?;
    }
    Ok(ExperimentReport { rows, simulator_runs })
}

/// `x` with 9 significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..10).contains(&mag) {
        let decimals = (8 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `rows` as CSV with a header.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record([
        "sweep_variable",
        "sweep_value",
        "policy",
        "mode",
        "sbop",
        "std_error",
        "wall_time_s",
        "iterations",
        "config_hash",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.sweep_variable.clone(),
            opt(r.sweep_value.map(format_sig)),
            r.policy.to_string(),
            r.mode.to_string(),
            format_sig(r.sbop),
            opt(r.std_error.map(format_sig)),
            format_sig(r.wall_time_s),
            opt(r.iterations),
            r.config_hash.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn create_output(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::validation("output", format!("cannot write {}: {e}", path.display())))
}
