use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaycache_core::analytic::SbopEvaluator;
use relaycache_core::experiment::config::{parse_list, parse_sweep};
use relaycache_core::experiment::{
    compute_policy, emit_association_snapshot, format_sig, run_experiment, write_rows, EvaluationMode,
    ExperimentSpec, PolicyKind,
};
use relaycache_core::sim::run_trials;
use relaycache_core::Error;

#[derive(Parser)]
#[command(name = "relaycache", version, about = "Backhaul offloading analysis and cache placement for relay-assisted mmWave networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sweep as <var>=<v1,v2,...>
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Comma-separated policies (cp_poa, cp_co, mpc, uc)
    #[arg(long, global = true)]
    policies: Option<String>,
    /// Comma-separated modes (analytic, noise_limited, monte_carlo)
    #[arg(long, global = true)]
    modes: Option<String>,
    #[arg(long, global = true)]
    deployments: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    quadrature_order: Option<usize>,
    /// CP-POA tolerance
    #[arg(long, global = true)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum Verb {
    /// Analytic SBOP of one policy
    Analyze {
        #[arg(long, default_value = "mpc")]
        policy: PolicyKind,
    },
    /// Optimal caching probabilities
    Optimize {
        #[arg(long, default_value = "cp_poa")]
        method: PolicyKind,
        /// Objective: analytic or noise_limited
        #[arg(long, default_value = "analytic")]
        objective: EvaluationMode,
    },
    /// Monte Carlo SBOP of one policy
    Simulate {
        #[arg(long, default_value = "mpc")]
        policy: PolicyKind,
    },
    /// Full sweep over values, policies and modes
    Sweep,
    /// Association snapshot of 60 UEs in one deployment
    Snapshot {
        #[arg(long, default_value = "mpc")]
        policy: PolicyKind,
    },
}

fn resolve(common: &Common) -> relaycache_core::Result<ExperimentSpec> {
    let mut spec = match &common.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(s) = &common.sweep {
        let (var, values) = parse_sweep(s)?;
        spec.sweep_variable = Some(var);
        spec.sweep_values = values;
    }
    if let Some(p) = &common.policies {
        spec.policies = parse_list(p)?;
    }
    if let Some(m) = &common.modes {
        spec.modes = parse_list(m)?;
    }
    if let Some(n) = common.deployments {
        spec.n_deployments = n;
    }
    if let Some(s) = common.seed {
        spec.seed = s;
    }
    if let Some(o) = &common.out {
        spec.output = Some(o.clone());
    }
    if let Some(q) = common.quadrature_order {
        spec.quadrature_order = q;
    }
    if let Some(e) = common.epsilon {
        spec.poa_epsilon = e;
    }
    Ok(spec)
}

fn print_probs(probs: &[f64]) {
    let list: Vec<String> = probs.iter().map(|&p| format_sig(p)).collect();
    println!("probs = [{}]", list.join(", "));
}

fn run(cli: Cli) -> relaycache_core::Result<()> {
    let spec = resolve(&cli.common)?;
    match cli.verb {
        Verb::Sweep => {
            let report = run_experiment(&spec, cli.common.workers)?;
            if spec.output.is_none() {
                write_rows(&report.rows, std::io::stdout().lock())?;
            } else {
                eprintln!("wrote {} rows", report.rows.len());
            }
        }
        verb => {
            if let Some(w) = cli.common.workers {
                rayon_threads(w)?;
            }
            let cfg = spec.network()?;
            let catalog = spec.catalog()?;
            match verb {
                Verb::Analyze { policy } => {
                    let p = compute_policy(policy, EvaluationMode::Analytic, &spec, &cfg, &catalog)?;
                    let b = SbopEvaluator::new(&cfg, spec.quadrature_order)?.total(&p.policy, &catalog)?;
                    println!("policy = {policy}");
                    print_probs(&p.policy.probs);
                    println!("p_two_hop = {}", format_sig(b.p_two_hop));
                    println!("sbop = {}", format_sig(b.total));
                }
                Verb::Optimize { method, objective } => {
                    if !matches!(method, PolicyKind::CpPoa | PolicyKind::CpCo) {
                        return Err(Error::validation("method", "must be cp_poa or cp_co"));
                    }
                    let p = compute_policy(method, objective, &spec, &cfg, &catalog)?;
                    let (value, _) =
                        relaycache_core::experiment::evaluate(objective, &p.policy, &spec, &cfg, &catalog)?;
                    println!("method = {method}");
                    println!("objective = {objective}");
                    print_probs(&p.policy.probs);
                    println!("value = {}", format_sig(value));
                    if let Some(it) = p.iterations {
                        println!("iterations = {it}");
                    }
                }
                Verb::Simulate { policy } => {
                    let p = compute_policy(policy, EvaluationMode::MonteCarlo, &spec, &cfg, &catalog)?;
                    let mc = run_trials(&cfg, &catalog, &p.policy, spec.n_deployments, spec.seed)?;
                    println!("policy = {policy}");
                    println!("deployments = {}", mc.deployments);
                    println!("sbop = {}", format_sig(mc.sbop));
                    println!("std_error = {}", format_sig(mc.std_error));
                    println!(
                        "associations = one_hop {} two_hop {} none {}",
                        mc.histogram.one_hop, mc.histogram.two_hop, mc.histogram.none
                    );
                }
                Verb::Snapshot { policy } => {
                    let out = spec
                        .output
                        .clone()
                        .ok_or_else(|| Error::validation("out", "snapshot needs --out"))?;
                    let p = compute_policy(policy, EvaluationMode::Analytic, &spec, &cfg, &catalog)?;
                    let rows =
                        emit_association_snapshot(&cfg, &catalog, &p.policy, spec.seed, &spec.config_hash(), &out)?;
                    let ok = rows.iter().filter(|r| r.offload_success).count();
                    eprintln!("wrote {} UEs, {ok} offloaded", rows.len());
                }
                Verb::Sweep => unreachable!(),
            }
        }
    }
    Ok(())
}

fn rayon_threads(n: usize) -> relaycache_core::Result<()> {
    if n == 0 {
        return Err(Error::validation("workers", "must be at least 1"));
    }
    // a second initialisation only happens in-process and is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
