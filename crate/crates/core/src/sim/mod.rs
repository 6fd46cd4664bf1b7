//! Monte Carlo ground truth: PPP deployments, probabilistic caches, the BS/RN
//! selection protocol and per-hop SINR evaluation.

pub mod deployment;
pub mod selection;
pub mod trials;

pub use deployment::{fill_caches, place_caches, sample_deployment, Deployment};
pub use selection::{select_nodes, select_over, Association, NodeSelection};
pub use trials::{run_trials, run_trials_recorded, serve_request, AssociationHistogram, McEstimate, ServedRequest, TrialOutcome};
