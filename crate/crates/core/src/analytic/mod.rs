//! Stochastic-geometry evaluation of the SBOP.

pub mod association;
pub mod interference;
pub mod noise_limited;
pub mod sbop;
pub mod tier;

pub use association::{
    association_normalizer, one_hop_weight, two_hop_probability, uar_probabilities, weighted_pdf, Link,
    RelayTable,
};
pub use interference::{laplace_interference, InterferenceKernel, InterfererTier, Scenario};
pub use sbop::{sbop_one_hop, sbop_two_hop, total_sbop, FileModel, SbopBreakdown, SbopEvaluator, SbopSurrogate};
pub use tier::{inverse_power_cdf, inverse_power_pdf, TierSpec};
pub use noise_limited::{compute_kkt_coefficients, sbop_noise_limited, KktCoefficients};
