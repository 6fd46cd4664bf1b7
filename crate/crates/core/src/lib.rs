//! Successful backhaul offloading probability (SBOP) of cache-enabled,
//! relay-assisted mmWave networks: analytic evaluation, Monte Carlo
//! simulation and caching placement optimisation.

pub mod analytic;
pub mod error;
pub mod experiment;
pub mod model;
pub mod numeric;
pub mod optim;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    db_to_linear, dbm_to_watts, gain_distribution, los_probability, mpc_policy, path_loss,
    uc_policy, zipf_popularity, CachingPolicy, ContentCatalog, GainPattern, NetworkConfig,
};
pub use numeric::{gauss_laguerre, QuadratureRule};
