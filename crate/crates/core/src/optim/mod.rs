//! Caching placement optimizers.

pub mod co;
pub mod poa;

pub use co::{caching_prob_from_multiplier, cp_co, cp_co_with, CoResult};
pub use poa::{cp_poa, project_to_boundary, PoaOptions, PoaResult, PolyblockState, Vertex};
